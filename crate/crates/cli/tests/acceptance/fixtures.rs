//! Printed results used as arithmetic fixtures. Val cells keep their
//! printed text so the precision of each value is known.

pub struct Row {
    pub name: &'static str,
    /// MSE and MAE per block: [block 1 MSE, block 1 MAE, block 2 MSE, block 2 MAE].
    pub val: [&'static str; 4],
    /// Printed improvement over the regression baseline, in percent.
    pub delta_base: [f64; 4],
    /// Printed improvement over the zero-shot forecaster (hybrid rows only).
    pub delta_zs: Option<[f64; 4]>,
}

pub struct Summary {
    pub baseline: Row,
    pub rows: &'static [Row],
    /// Printed Avg Improve cells: (vs baseline, vs zero-shot) per metric column.
    pub avg_improve: [[f64; 2]; 4],
}

/// Forecasters in column order; each has an MSE and an MAE column.
pub const WINDOW_MODELS: [&str; 7] =
    ["TimerXL", "Sundial", "Chronos2 (mv)", "Chronos2 (future)", "TimesFM", "Moirai2", "TiRex"];

pub struct Windows {
    pub months: [&'static str; 12],
    pub zs: [[f64; 14]; 12],
    pub fbr: [[f64; 14]; 12],
    pub avg_zs: [f64; 14],
    pub avg_fbr: [f64; 14],
    pub improve: [f64; 14],
}

/// China 12-month summary: day-ahead then real-time, baseline LGBM (ic27).
pub const CHINA_SUMMARY: Summary = Summary {
    baseline: Row {
        name: "LGBM (ic27)",
        val: ["35658.52", "100.53", "49182.67", "121.63"],
        delta_base: [0.0; 4],
        delta_zs: None,
    },
    rows: &[
        Row {
            name: "TimerXL",
            val: ["76278.90", "162.69", "86353.72", "171.63"],
            delta_base: [-113.91, -61.83, -75.58, -41.11],
            delta_zs: None,
        },
        Row {
            name: "TimerXL + FutureBoosting",
            val: ["33978.45", "94.78", "44522.21", "117.10"],
            delta_base: [4.71, 5.72, 9.48, 3.72],
            delta_zs: Some([55.45, 41.74, 48.44, 31.77]),
        },
        Row {
            name: "Sundial",
            val: ["62979.60", "143.60", "72219.22", "154.30"],
            delta_base: [-76.62, -42.84, -46.84, -26.86],
            delta_zs: None,
        },
        Row {
            name: "Sundial + FutureBoosting",
            val: ["35586.43", "97.09", "45415.52", "117.45"],
            delta_base: [0.20, 3.42, 7.66, 3.44],
            delta_zs: Some([43.50, 32.39, 37.11, 23.88]),
        },
        Row {
            name: "Chronos2(mv)",
            val: ["63465.48", "144.60", "72517.75", "160.76"],
            delta_base: [-77.98, -43.84, -47.45, -32.17],
            delta_zs: None,
        },
        Row {
            name: "Chronos2(mv) + FutureBoosting",
            val: ["34344.18", "94.90", "46697.19", "118.93"],
            delta_base: [3.69, 5.60, 5.05, 2.22],
            delta_zs: Some([45.89, 34.37, 35.61, 26.02]),
        },
        Row {
            name: "Chronos2(future)",
            val: ["52197.23", "137.00", "64820.38", "162.88"],
            delta_base: [-46.38, -36.27, -31.80, -33.91],
            delta_zs: None,
        },
        Row {
            name: "Chronos2(future) + FutureBoosting",
            val: ["35315.01", "97.14", "46683.65", "119.53"],
            delta_base: [0.96, 3.37, 5.08, 1.73],
            delta_zs: Some([32.34, 29.09, 27.98, 26.61]),
        },
        Row {
            name: "TimesFM",
            val: ["66423.97", "138.97", "81627.66", "154.98"],
            delta_base: [-86.28, -38.24, -65.97, -27.42],
            delta_zs: None,
        },
        Row {
            name: "TimesFM + FutureBoosting",
            val: ["35411.86", "95.04", "46778.28", "118.04"],
            delta_base: [0.69, 5.46, 4.89, 2.95],
            delta_zs: Some([46.69, 31.61, 42.69, 23.84]),
        },
        Row {
            name: "Moirai2",
            val: ["65750.80", "137.58", "79852.29", "155.49"],
            delta_base: [-84.39, -36.85, -62.36, -27.84],
            delta_zs: None,
        },
        Row {
            name: "Moirai2 + FutureBoosting",
            val: ["34930.18", "95.73", "45987.65", "117.70"],
            delta_base: [2.04, 4.77, 6.50, 3.23],
            delta_zs: Some([46.87, 30.42, 42.41, 24.30]),
        },
        Row {
            name: "TiRex",
            val: ["67450.65", "133.14", "79122.98", "143.93"],
            delta_base: [-89.16, -32.44, -60.88, -18.33],
            delta_zs: None,
        },
        Row {
            name: "TiRex + FutureBoosting",
            val: ["35543.37", "96.94", "46944.86", "117.35"],
            delta_base: [0.32, 3.57, 4.55, 3.52],
            delta_zs: Some([47.30, 27.19, 40.67, 18.47]),
        },
    ],
    avg_improve: [[1.8, 45.43], [4.56, 32.4], [6.17, 39.27], [2.97, 24.98]],
};

/// RealE 24-step summary: FR then DE, baseline Linear.
pub const REALE_SUMMARY: Summary = Summary {
    baseline: Row { name: "Linear", val: ["22.33", "2.79", "13.63", "2.55"], delta_base: [0.0; 4], delta_zs: None },
    rows: &[
        Row {
            name: "TimerXL",
            val: ["4.41", "1.37", "3.00", "1.21"],
            delta_base: [80.25, 50.86, 77.99, 52.48],
            delta_zs: None,
        },
        Row {
            name: "TimerXL + FutureBoosting",
            val: ["3.66", "1.26", "1.85", "0.95"],
            delta_base: [83.61, 54.81, 86.43, 62.69],
            delta_zs: Some([16.98, 7.72, 38.40, 21.36]),
        },
        Row {
            name: "Sundial",
            val: ["4.00", "1.29", "4.23", "1.42"],
            delta_base: [82.09, 53.73, 68.96, 44.23],
            delta_zs: None,
        },
        Row {
            name: "Sundial + FutureBoosting",
            val: ["3.45", "1.20", "2.32", "1.09"],
            delta_base: [84.56, 56.96, 82.98, 57.18],
            delta_zs: Some([13.75, 6.74, 45.12, 23.25]),
        },
        Row {
            name: "Chronos2",
            val: ["3.61", "1.23", "2.28", "1.03"],
            delta_base: [83.83, 55.89, 83.28, 59.55],
            delta_zs: None,
        },
        Row {
            name: "Chronos2 + FutureBoosting",
            val: ["2.90", "1.11", "1.49", "0.87"],
            delta_base: [87.01, 60.19, 89.07, 65.83],
            delta_zs: Some([19.53, 9.63, 34.55, 15.69]),
        },
        Row {
            name: "TiRex",
            val: ["3.76", "1.24", "2.31", "1.05"],
            delta_base: [83.16, 55.53, 83.06, 58.76],
            delta_zs: None,
        },
        Row {
            name: "TiRex + FutureBoosting",
            val: ["3.15", "1.14", "1.63", "0.90"],
            delta_base: [85.90, 59.11, 88.05, 64.65],
            delta_zs: Some([16.24, 8.58, 29.51, 13.87]),
        },
        Row {
            name: "Moirai2",
            val: ["3.81", "1.25", "2.30", "1.07"],
            delta_base: [82.94, 55.17, 83.13, 57.96],
            delta_zs: None,
        },
        Row {
            name: "Moirai2 + FutureBoosting",
            val: ["3.21", "1.16", "1.53", "0.88"],
            delta_base: [85.63, 58.39, 88.78, 65.44],
            delta_zs: Some([15.63, 7.86, 33.77, 17.16]),
        },
        Row {
            name: "TimesFM",
            val: ["3.723", "1.239", "2.908", "1.188"],
            delta_base: [83.33, 55.55, 78.67, 53.34],
            delta_zs: None,
        },
        Row {
            name: "TimesFM + FutureBoosting",
            val: ["3.001", "1.116", "1.810", "0.953"],
            delta_base: [86.56, 59.98, 86.72, 62.57],
            delta_zs: Some([19.40, 9.95, 37.75, 19.76]),
        },
    ],
    avg_improve: [[85.54, 16.92], [58.24, 8.41], [87.0, 36.52], [63.06, 18.52]],
};

/// Shanxi day-ahead month-wise ZS and FBR results.
pub const DAY_AHEAD_WINDOWS: Windows = Windows {
    months: [
        "202501", "202502", "202503", "202504", "202505", "202506", "202507", "202508", "202509", "202510", "202511",
        "202512",
    ],
    zs: [
        [
            96031.92, 195.56, 77180.33, 163.32, 89610.94, 175.98, 66888.0, 159.64, 73564.2, 160.36, 81880.01, 166.92,
            79950.36, 161.65,
        ],
        [
            134084.19, 237.77, 121219.58, 220.57, 114767.0, 220.21, 92523.61, 211.76, 126918.32, 213.88, 123831.87,
            222.76, 121434.01, 210.61,
        ],
        [
            93755.35, 196.24, 80372.27, 185.39, 78314.09, 172.93, 66959.59, 161.66, 97939.16, 180.96, 90217.22, 173.04,
            95215.36, 165.77,
        ],
        [
            77669.32, 175.9, 57050.1, 141.62, 53054.38, 137.56, 41129.56, 122.26, 60371.87, 133.42, 58169.98, 134.34,
            62035.25, 128.32,
        ],
        [
            93666.34, 180.71, 86903.53, 172.03, 100305.2, 185.01, 92857.96, 192.45, 86284.9, 162.18, 90186.08, 166.77,
            87845.8, 153.05,
        ],
        [
            48227.93, 128.14, 25582.65, 95.52, 27434.78, 92.98, 24986.22, 88.57, 30333.88, 94.76, 30058.37, 91.84,
            33013.53, 88.16,
        ],
        [
            47276.94, 113.89, 34349.32, 94.85, 35194.34, 103.91, 24992.95, 97.87, 37760.89, 93.24, 41461.06, 96.68,
            45637.71, 98.15,
        ],
        [
            26194.18, 92.84, 18446.3, 84.86, 19041.06, 79.95, 22911.02, 82.82, 21042.63, 82.44, 16232.81, 70.61,
            19955.39, 73.31,
        ],
        [
            58305.51, 124.13, 50975.25, 115.6, 54196.83, 128.87, 48346.62, 120.97, 55041.01, 122.43, 54495.37, 118.3,
            54019.0, 113.74,
        ],
        [
            106548.72, 218.57, 88226.08, 194.62, 77523.35, 183.72, 54935.98, 161.4, 91218.39, 188.55, 87374.95, 182.83,
            90006.81, 185.27,
        ],
        [
            33343.31, 111.37, 27710.86, 100.95, 27223.86, 97.97, 22383.87, 86.41, 27917.56, 90.34, 25812.17, 82.76,
            26125.74, 75.93,
        ],
        [
            100243.11, 177.1, 87738.88, 153.87, 83058.95, 155.21, 67451.35, 158.16, 88694.82, 145.02, 89289.72, 144.1,
            94168.8, 143.73,
        ],
    ],
    fbr: [
        [
            28336.35, 89.36, 21958.62, 84.95, 18692.07, 77.39, 20340.07, 87.74, 20774.21, 79.08, 19424.7, 80.66,
            20981.86, 83.95,
        ],
        [
            40757.15, 110.22, 45136.53, 123.09, 44370.32, 120.87, 48430.27, 125.53, 44246.05, 116.91, 48259.19, 119.29,
            43017.85, 118.11,
        ],
        [
            45468.58, 109.31, 42478.45, 111.75, 43072.86, 109.83, 46726.38, 110.72, 42435.1, 110.51, 48687.06, 115.28,
            45406.77, 115.15,
        ],
        [
            26432.77, 79.77, 29912.2, 83.65, 30530.24, 83.57, 31365.62, 84.79, 33709.88, 86.42, 29063.96, 83.9,
            34297.45, 88.75,
        ],
        [
            32690.44, 92.38, 37007.0, 97.54, 37003.55, 98.47, 36565.64, 96.68, 35779.71, 96.44, 31915.1, 90.78,
            36821.45, 97.27,
        ],
        [
            21909.27, 86.89, 23753.56, 86.64, 24089.27, 85.46, 21861.27, 76.54, 20864.53, 77.29, 20510.49, 77.03,
            22181.49, 82.93,
        ],
        [
            22805.03, 85.41, 28215.34, 90.66, 24555.22, 87.92, 32517.7, 96.25, 25388.54, 86.02, 24899.19, 86.08,
            26646.3, 88.5,
        ],
        [
            31828.17, 90.12, 25673.99, 77.76, 28298.3, 81.09, 24676.54, 84.59, 31304.71, 83.44, 35594.87, 92.77,
            30230.98, 85.11,
        ],
        [
            32633.16, 75.44, 39071.02, 80.19, 38111.77, 80.32, 31227.95, 75.61, 40301.52, 81.39, 37861.71, 80.32,
            41216.2, 83.26,
        ],
        [
            79067.78, 167.47, 85247.65, 173.37, 81003.48, 169.03, 84240.63, 175.93, 87127.87, 176.08, 73088.76, 163.71,
            81226.46, 167.61,
        ],
        [11194.69, 55.77, 9789.58, 48.1, 8740.34, 49.97, 11148.39, 52.26, 8581.9, 47.5, 11883.0, 54.63, 8719.66, 48.81],
        [
            34617.97, 95.26, 38793.17, 107.41, 33662.7, 94.84, 34679.67, 99.04, 34428.32, 99.38, 37974.19, 104.36,
            35774.0, 103.8,
        ],
    ],
    avg_zs: [
        76278.9, 162.69, 62979.6, 143.6, 63310.4, 144.53, 52197.23, 137.0, 66423.97, 138.97, 65750.8, 137.58, 67450.65,
        133.14,
    ],
    avg_fbr: [
        33978.45, 94.78, 35586.43, 97.09, 34344.18, 94.9, 35315.01, 97.14, 35411.86, 95.04, 34930.18, 95.73, 35543.37,
        96.94,
    ],
    improve: [55.45, 41.74, 43.5, 32.39, 45.75, 34.34, 32.34, 29.09, 46.69, 31.61, 46.87, 30.42, 47.3, 27.19],
};

/// Shanxi real-time month-wise ZS and FBR results.
pub const REAL_TIME_WINDOWS: Windows = Windows {
    months: [
        "202501", "202502", "202503", "202504", "202505", "202506", "202507", "202508", "202509", "202510", "202511",
        "202512",
    ],
    zs: [
        [
            118895.21, 217.91, 97693.37, 190.56, 114730.62, 199.96, 99201.9, 195.49, 98345.31, 188.98, 114230.96,
            202.83, 114310.87, 198.35,
        ],
        [
            120379.08, 229.16, 85619.59, 181.18, 90050.68, 203.8, 80630.58, 209.08, 98546.03, 191.38, 117523.33,
            222.87, 97648.07, 179.53,
        ],
        [
            107854.53, 206.39, 95016.02, 202.85, 88038.66, 191.04, 77018.86, 187.73, 111121.3, 196.46, 102835.81,
            195.97, 109298.64, 178.06,
        ],
        [
            82330.52, 182.88, 67713.56, 151.2, 68948.49, 168.73, 64970.55, 177.79, 80565.65, 153.57, 75139.75, 150.78,
            76841.29, 140.66,
        ],
        [
            102967.35, 188.26, 89835.88, 171.51, 106919.77, 212.81, 108991.74, 232.27, 113641.81, 184.17, 97904.36,
            176.92, 95134.62, 155.97,
        ],
        [
            65641.39, 139.82, 47375.07, 121.01, 47714.17, 120.61, 44323.24, 120.88, 48809.47, 109.9, 49823.53, 115.69,
            52145.87, 112.2,
        ],
        [
            41142.87, 108.49, 30470.52, 89.86, 31539.87, 99.73, 27781.38, 106.07, 32773.53, 87.15, 41767.1, 95.36,
            36157.71, 87.12,
        ],
        [
            31030.77, 94.68, 25916.09, 90.2, 26063.24, 92.93, 29037.41, 97.29, 33563.3, 94.7, 23631.02, 79.13,
            28671.56, 80.56,
        ],
        [
            85633.09, 156.08, 78310.54, 154.3, 79575.4, 165.89, 76442.12, 172.88, 79838.22, 146.3, 86435.07, 156.92,
            83710.0, 146.0,
        ],
        [
            143685.32, 245.75, 125149.12, 234.85, 91568.2, 210.2, 66799.12, 180.18, 155995.52, 259.92, 127427.5,
            228.15, 134176.6, 232.44,
        ],
        [
            38809.75, 120.18, 36503.1, 114.82, 31784.27, 107.45, 28197.25, 102.97, 34545.62, 99.15, 31778.31, 96.23,
            32763.18, 87.15,
        ],
        [
            97874.73, 169.98, 87027.78, 149.2, 93279.61, 155.96, 74450.43, 171.96, 91786.17, 148.05, 89730.76, 145.0,
            88617.3, 129.12,
        ],
    ],
    fbr: [
        [
            23393.77, 100.68, 27793.07, 107.87, 28962.75, 108.12, 41628.91, 127.75, 31895.88, 114.04, 27384.44, 106.69,
            34742.31, 121.41,
        ],
        [
            32541.1, 119.51, 36259.24, 126.5, 38276.06, 124.7, 37569.89, 123.42, 32796.34, 116.31, 35840.88, 115.25,
            38160.78, 117.9,
        ],
        [
            65560.99, 135.07, 67539.49, 135.37, 63971.96, 136.43, 69542.25, 137.31, 64435.87, 136.05, 65943.71, 137.51,
            68689.22, 138.64,
        ],
        [
            38817.92, 116.73, 43164.55, 121.84, 38725.26, 106.06, 49110.38, 120.86, 41578.67, 106.84, 38528.82, 108.33,
            41703.71, 107.6,
        ],
        [
            45863.1, 118.49, 44887.32, 117.2, 49086.25, 116.84, 47795.9, 121.09, 48432.05, 119.94, 46761.93, 122.08,
            53846.44, 123.05,
        ],
        [
            42519.09, 110.62, 44953.33, 119.6, 43102.85, 118.05, 40441.2, 107.2, 40049.48, 108.22, 43203.69, 114.87,
            41016.73, 110.74,
        ],
        [
            25942.39, 99.99, 32145.62, 99.94, 22851.93, 97.04, 23634.3, 92.29, 25053.84, 104.78, 21023.51, 93.36,
            26019.67, 96.04,
        ],
        [
            42816.39, 108.7, 36533.89, 100.93, 43829.6, 107.1, 36597.41, 105.57, 40358.88, 104.96, 45826.41, 107.22,
            43251.67, 105.4,
        ],
        [
            57474.52, 109.76, 62770.34, 110.22, 63742.47, 113.22, 59888.76, 114.83, 64865.33, 110.78, 63983.58, 113.4,
            63109.99, 113.77,
        ],
        [
            112637.92, 203.07, 105293.65, 196.79, 120206.91, 215.92, 102746.86, 200.65, 122923.08, 214.33, 115473.27,
            205.1, 110535.59, 199.5,
        ],
        [
            16096.67, 73.5, 16402.15, 74.61, 16514.01, 75.48, 17205.48, 71.43, 16239.71, 72.56, 16502.11, 76.04,
            15307.39, 71.51,
        ],
        [
            30602.62, 109.11, 27243.63, 98.49, 31096.27, 108.19, 34042.47, 112.0, 32710.28, 107.72, 31379.47, 112.55,
            26954.77, 102.59,
        ],
    ],
    avg_zs: [
        86353.72, 171.63, 72219.22, 154.3, 72517.75, 160.76, 64820.38, 162.88, 81627.66, 154.98, 79852.29, 155.49,
        79122.98, 143.93,
    ],
    avg_fbr: [
        44522.21, 117.1, 45415.52, 117.45, 46697.19, 118.93, 46683.65, 119.53, 46778.28, 118.04, 45987.65, 117.7,
        46944.86, 117.35,
    ],
    improve: [48.44, 31.77, 37.11, 23.88, 35.61, 26.02, 27.98, 26.61, 42.69, 23.83, 42.41, 24.3, 40.67, 18.47],
};
