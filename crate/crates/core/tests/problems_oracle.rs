//! Manufactured sources checked against values computed symbolically
//! (sympy script in `tests/oracle/sources.py`).

use mhd_core::problems::{
    corner_benchmark_with, smooth_benchmark, smooth_benchmark_with, BenchmarkProblem,
    MagneticVariant, Omega, VelocityVariant,
};

// x, y, u1, u2, p, b1, b2, f1, f2, g1, g2, div u, div b
type Row = [f64; 13];

const SMOOTH_DEFAULT: [Row; 5] = [
    [
        1.34020618556701027e-01,
        7.97752808988763995e-01,
        -1.29418107017330308e-03,
        -2.21140081520708768e-03,
        -4.35885555426850479e-01,
        -3.28947664037923637e-01,
        -5.41650338040146728e-01,
        3.75747507318181351e-01,
        -1.07150675737323464e+00,
        -6.49363170773447163e+00,
        -1.06915966292563205e+01,
        0.00000000000000000e+00,
        0.00000000000000000e+00,
    ],
    [
        5.15463917525773141e-01,
        2.24719101123595499e-01,
        5.98348124342652603e-03,
        2.34461781431666977e-04,
        -1.70276844665817224e-02,
        7.60080953999799691e-01,
        3.15060411316083339e-02,
        -6.71144158288862425e-01,
        -3.02644747474769238e+00,
        1.50034400926904237e+01,
        6.22563778946537361e-01,
        0.00000000000000000e+00,
        0.00000000000000000e+00,
    ],
    [
        9.07216494845360821e-01,
        5.61797752808988748e-02,
        3.33479996193391799e-04,
        1.92741672978645755e-04,
        -7.22923665006370952e-01,
        2.82913434796799312e-01,
        1.68172697967130302e-01,
        -1.73082070404430244e+00,
        1.45942311664672864e+00,
        5.58448214188191017e+00,
        3.31952826874341556e+00,
        0.00000000000000000e+00,
        0.00000000000000000e+00,
    ],
    [
        3.19587628865979356e-01,
        4.94382022471910099e-01,
        1.32806549116950900e-04,
        -4.90262668632165596e-03,
        4.05421058728136236e-03,
        1.48888415954673507e-02,
        -5.36836550177331895e-01,
        -2.86262440753958014e+00,
        -1.01426106377950376e+00,
        2.94195626043071923e-01,
        -1.05967509616477606e+01,
        0.00000000000000000e+00,
        0.00000000000000000e+00,
    ],
    [
        7.21649484536082408e-02,
        9.32584269662921295e-01,
        -2.43862044109343420e-04,
        -2.26465524756372112e-04,
        -7.40298853237576715e-01,
        -2.19753258009052849e-01,
        -2.04833702817725005e-01,
        1.71133621824015836e+00,
        -1.59503139731606791e+00,
        -4.33778976760593604e+00,
        -4.04321216986857390e+00,
        0.00000000000000000e+00,
        0.00000000000000000e+00,
    ],
];

const SMOOTH_PRINTED_U: [Row; 5] = [
    [
        1.34020618556701027e-01,
        7.97752808988763995e-01,
        -1.29418107017330308e-03,
        2.21140081520708768e-03,
        -4.35885555426850479e-01,
        -3.28947664037923637e-01,
        -5.41650338040146728e-01,
        3.75749410132052042e-01,
        -8.53731504806767183e-01,
        -6.48626237612341061e+00,
        -1.06761899748335392e+01,
        -3.26484433343719391e-02,
        0.00000000000000000e+00,
    ],
    [
        5.15463917525773141e-01,
        2.24719101123595499e-01,
        5.98348124342652603e-03,
        -2.34461781431666977e-04,
        -1.70276844665817224e-02,
        7.60080953999799691e-01,
        3.15060411316083339e-02,
        -6.71142832527741318e-01,
        -3.03929389738404243e+00,
        1.50021420445646694e+01,
        6.45513687796887337e-01,
        -2.96373283716956431e-03,
        0.00000000000000000e+00,
    ],
    [
        9.07216494845360821e-01,
        5.61797752808988748e-02,
        3.33479996193391799e-04,
        -1.92741672978645755e-04,
        -7.22923665006370952e-01,
        2.82913434796799312e-01,
        1.68172697967130302e-01,
        -1.73082256640247922e+00,
        1.61892498302408550e+00,
        5.58089186786058633e+00,
        3.31759896012151101e+00,
        -1.29063495496462687e-02,
        0.00000000000000000e+00,
    ],
    [
        3.19587628865979356e-01,
        4.94382022471910099e-01,
        1.32806549116950900e-04,
        4.90262668632165596e-03,
        4.05421058728136236e-03,
        1.48888415954673507e-02,
        -5.36836550177331895e-01,
        -2.86285614093799134e+00,
        -5.86851648919158864e-01,
        2.68225430736061865e-01,
        -1.05964759050860753e+01,
        8.81482373904297770e-04,
        0.00000000000000000e+00,
    ],
    [
        7.21649484536082408e-02,
        9.32584269662921295e-01,
        -2.43862044109343420e-04,
        2.26465524756372112e-04,
        -7.40298853237576715e-01,
        -2.19753258009052849e-01,
        -2.04833702817725005e-01,
        1.71133748285233045e+00,
        -1.69716880121785629e+00,
        -4.33511764384712883e+00,
        -4.04081731176095538e+00,
        -1.24656083626941208e-02,
        0.00000000000000000e+00,
    ],
];

const SMOOTH_PRINTED_B: [Row; 5] = [
    [
        1.34020618556701027e-01,
        7.97752808988763995e-01,
        -1.29418107017330308e-03,
        -2.21140081520708768e-03,
        -4.35885555426850479e-01,
        -3.28947664037923637e-01,
        5.41650338040146728e-01,
        1.20125267995401086e+00,
        -1.57284125145353215e+00,
        -6.90424931009965201e-03,
        -1.55591455116034331e-02,
        0.00000000000000000e+00,
        -4.61535149503083186e+00,
    ],
    [
        5.15463917525773141e-01,
        2.24719101123595499e-01,
        5.98348124342652603e-03,
        2.34461781431666977e-04,
        -1.70276844665817224e-02,
        7.60080953999799691e-01,
        -3.15060411316083339e-02,
        -7.99423371577831388e-01,
        6.82792288623082777e-02,
        1.25461299657380937e-03,
        -2.36093633700393858e-02,
        0.00000000000000000e+00,
        -2.32193987806549790e-01,
    ],
    [
        9.07216494845360821e-01,
        5.61797752808988748e-02,
        3.33479996193391799e-04,
        1.92741672978645755e-04,
        -7.22923665006370952e-01,
        2.82913434796799312e-01,
        -1.68172697967130302e-01,
        -1.78413716446954718e+00,
        1.54911628998846695e+00,
        3.59549453500873466e-03,
        1.99703987741022123e-03,
        0.00000000000000000e+00,
        -5.92465384844367104e+00,
    ],
    [
        3.19587628865979356e-01,
        4.94382022471910099e-01,
        1.32806549116950900e-04,
        -4.90262668632165596e-03,
        4.05421058728136236e-03,
        1.48888415954673507e-02,
        5.36836550177331895e-01,
        -1.74565972252403029e-02,
        -9.35352031176749921e-01,
        2.56685223394318950e-02,
        -2.52851505570629370e-04,
        0.00000000000000000e+00,
        5.95383662452635132e-02,
    ],
    [
        7.21649484536082408e-02,
        9.32584269662921295e-01,
        -2.43862044109343420e-04,
        -2.26465524756372112e-04,
        -7.40298853237576715e-01,
        -2.19753258009052849e-01,
        2.04833702817725005e-01,
        1.77214833961362572e+00,
        -1.66027291574994251e+00,
        -2.63780095261809122e-03,
        -2.43791788154158317e-03,
        0.00000000000000000e+00,
        -5.98560064173144024e+00,
    ],
];

const SMOOTH_AS_PRINTED: [Row; 5] = [
    [
        1.34020618556701027e-01,
        7.97752808988763995e-01,
        -1.29418107017330308e-03,
        2.21140081520708768e-03,
        -4.35885555426850479e-01,
        -3.28947664037923637e-01,
        5.41650338040146728e-01,
        1.20125458276788155e+00,
        -1.35506599888706458e+00,
        4.65082300961811479e-04,
        -1.52491088820787653e-04,
        -3.26484433343719391e-02,
        -4.61535149503083186e+00,
    ],
    [
        5.15463917525773141e-01,
        2.24719101123595499e-01,
        5.98348124342652603e-03,
        -2.34461781431666977e-04,
        -1.70276844665817224e-02,
        7.60080953999799691e-01,
        -3.15060411316083339e-02,
        -7.99422045816710392e-01,
        5.54328062259579826e-02,
        -4.34351291810042590e-05,
        -6.59454519689341547e-04,
        -2.96373283716956431e-03,
        -2.32193987806549790e-01,
    ],
    [
        9.07216494845360821e-01,
        5.61797752808988748e-02,
        3.33479996193391799e-04,
        -1.92741672978645755e-04,
        -7.22923665006370952e-01,
        2.82913434796799312e-01,
        -1.68172697967130302e-01,
        -1.78413902682772396e+00,
        1.70861815636582381e+00,
        5.22051368447583973e-06,
        6.77312555055669053e-05,
        -1.29063495496462687e-02,
        -5.92465384844367104e+00,
    ],
    [
        3.19587628865979356e-01,
        4.94382022471910099e-01,
        1.32806549116950900e-04,
        4.90262668632165596e-03,
        4.05421058728136236e-03,
        1.48888415954673507e-02,
        5.36836550177331895e-01,
        -1.76883306236517920e-02,
        -5.07942616316405138e-01,
        -3.01672967578151723e-04,
        2.22050561149932114e-05,
        8.81482373904297770e-04,
        5.95383662452635132e-02,
    ],
    [
        7.21649484536082408e-02,
        9.32584269662921295e-01,
        -2.43862044109343420e-04,
        2.26465524756372112e-04,
        -7.40298853237576715e-01,
        -2.19753258009052849e-01,
        2.04833702817725005e-01,
        1.77214960422579781e+00,
        -1.76241031965173089e+00,
        3.43228061893459610e-05,
        -4.30597739232261258e-05,
        -1.24656083626941208e-02,
        -5.98560064173144024e+00,
    ],
];

const CORNER_STANDARD: [Row; 7] = [
    [
        2.99999999999999989e-01,
        6.99999999999999956e-01,
        2.57146539007974484e+00,
        9.49865196788958865e-01,
        2.66585393923703284e+00,
        -2.76624822248781155e-01,
        6.75584496914581334e-01,
        1.85012376257818190e+01,
        -3.07448008268720940e+01,
        -1.38520934960003217e+00,
        -1.82451180039443606e+00,
        2.17066284129402098e-165,
        0.00000000000000000e+00,
    ],
    [
        -5.99999999999999978e-01,
        2.00000000000000011e-01,
        2.10723733784891598e+00,
        2.98570503701329359e+00,
        -1.17877172470233837e+00,
        -6.27175606168920652e-01,
        4.58098978197414353e-01,
        1.22547088201908245e+01,
        4.18266107817633426e+01,
        -1.47106182671072916e+00,
        -5.08329193827739445e-01,
        -1.35666427580876311e-166,
        0.00000000000000000e+00,
    ],
    [
        9.00000000000000022e-01,
        5.00000000000000028e-02,
        1.16829019153377858e-01,
        1.51455066760369426e-03,
        4.14541172023703908e+00,
        -1.27665467261439056e-02,
        6.90023466288502196e-01,
        -2.22754097795669495e+01,
        -1.45378856719548004e+01,
        -1.64565774096061590e+00,
        -7.25080728236977001e-02,
        -1.05989396547559618e-168,
        0.00000000000000000e+00,
    ],
    [
        -5.00000000000000028e-02,
        3.33333333333333329e-02,
        6.98297622727355294e-01,
        8.08283890762645063e-01,
        -1.47540627503272903e+00,
        -1.28004921173608488e+00,
        1.12178369474316453e+00,
        6.60209116132909230e+02,
        1.19947425751679702e+03,
        -6.42730824955730817e+00,
        -3.39234480867788202e+00,
        6.94612109214086714e-164,
        0.00000000000000000e+00,
    ],
    [
        -6.99999999999999956e-01,
        9.00000000000000022e-01,
        3.94504210865931526e+00,
        3.59836800610395313e+00,
        2.43306962774813451e-01,
        -4.32148708477579135e-01,
        4.69546915434580103e-01,
        2.12123483336175198e+01,
        3.44915976919705525e+00,
        -3.66053296302028819e-01,
        -5.57165445657227809e-01,
        -4.34132568258804196e-165,
        0.00000000000000000e+00,
    ],
    [
        -2.99999999999999989e-01,
        -8.00000000000000044e-01,
        7.56822235807069199e-02,
        8.07767616643650932e-01,
        -3.87028409579783395e+00,
        -6.97549821937494263e-01,
        8.38201140057823202e-02,
        -2.44174285113520426e+01,
        -1.48487533349433143e+01,
        -5.84022801426201110e-01,
        -1.95843334126475210e+00,
        5.42665710323505245e-166,
        0.00000000000000000e+00,
    ],
    [
        -9.00000000000000022e-01,
        -1.00000000000000006e-01,
        1.63793668925687741e+00,
        3.32467455839403625e+00,
        -1.89522466421022240e+00,
        -6.09065442597796269e-01,
        3.22301234129488856e-01,
        -7.70553383983697504e+00,
        2.35417873719879118e+01,
        -1.55115364289038404e+00,
        -7.71268721908865751e-01,
        -6.78332137904381556e-167,
        0.00000000000000000e+00,
    ],
];

const CORNER_ALT: [Row; 7] = [
    [
        2.99999999999999989e-01,
        6.99999999999999956e-01,
        8.69701773017714119e-01,
        -1.34466203889833574e-01,
        -5.61180691615426230e+00,
        -2.76624822248781155e-01,
        6.75584496914581334e-01,
        1.22676174705380205e+01,
        3.59201901564643649e+01,
        9.97719296987127080e-02,
        6.20157010366318429e-01,
        2.71332855161752622e-166,
        0.00000000000000000e+00,
    ],
    [
        -5.99999999999999978e-01,
        2.00000000000000011e-01,
        1.10498370656649381e+00,
        -2.78340222423227424e+00,
        -4.12930359499827038e+00,
        -6.27175606168920652e-01,
        4.58098978197414353e-01,
        -3.98621243870569373e+01,
        -2.45013167381450430e+01,
        -1.44636561849914091e+00,
        9.18312200680657442e-01,
        -1.08533142064701049e-165,
        0.00000000000000000e+00,
    ],
    [
        9.00000000000000022e-01,
        5.00000000000000028e-02,
        1.11210629725793902e-01,
        1.36323017434459171e-03,
        -4.74231225927480526e+00,
        -1.27665467261439056e-02,
        6.90023466288502196e-01,
        2.69858357251978767e+01,
        -1.05499419762419340e+01,
        -1.49082097986828233e+00,
        -6.48160145824973472e-02,
        1.05989396547559618e-168,
        0.00000000000000000e+00,
    ],
    [
        -5.00000000000000028e-02,
        3.33333333333333329e-02,
        2.31216734930974332e-01,
        -6.47206207697488822e-01,
        -1.35755007316979395e+01,
        -1.28004921173608488e+00,
        1.12178369474316453e+00,
        -1.48092002964785024e+03,
        -1.81600167281595049e+02,
        -9.14504439067443364e+00,
        8.49988583404060982e+00,
        1.73653027303521678e-164,
        0.00000000000000000e+00,
    ],
    [
        -6.99999999999999956e-01,
        9.00000000000000022e-01,
        8.88372236058355025e-01,
        -2.35051948033870506e+00,
        -3.96014480763868537e+00,
        -4.32148708477579135e-01,
        4.69546915434580103e-01,
        -2.00718622770653781e+01,
        7.90626590661766038e+00,
        -6.96757565120628808e-01,
        1.07640424131354351e+00,
        -5.42665710323505245e-166,
        0.00000000000000000e+00,
    ],
    [
        -2.99999999999999989e-01,
        -8.00000000000000044e-01,
        3.41424241388670868e+00,
        -2.71342210658693839e+00,
        -2.19196826633797470e-01,
        -6.97549821937494263e-01,
        8.38201140057823202e-02,
        3.23753874580771637e+01,
        -2.80616338954949462e+00,
        -3.38569392554811111e-02,
        1.04045092002750517e+00,
        -1.35666427580876311e-166,
        0.00000000000000000e+00,
    ],
    [
        -9.00000000000000022e-01,
        -1.00000000000000006e-01,
        2.07976680867211838e+00,
        -3.94546213493686171e+00,
        -2.68671781280344479e+00,
        -6.09065442597796269e-01,
        3.22301234129488856e-01,
        -5.56442275296400624e+00,
        -2.54178006396114249e+01,
        -7.74283586830554649e-01,
        3.20480541718132672e-01,
        -5.42665710323505245e-166,
        0.00000000000000000e+00,
    ],
];

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-11 * scale.max(1.0)
}

fn check(problem: &BenchmarkProblem, rows: &[Row]) {
    let prm = problem.params;
    for row in rows {
        let x = [row[0], row[1]];
        let j = problem.jet(x);
        let f = j.f(&prm);
        let g = j.g(&prm);
        let got = [
            j.u[0],
            j.u[1],
            j.p,
            j.b[0],
            j.b[1],
            f[0],
            f[1],
            g[0],
            g[1],
            j.div_u(),
            j.div_b(),
        ];
        let scale = row[2..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (k, (&a, &e)) in got.iter().zip(&row[2..]).enumerate() {
            assert!(
                close(a, e, scale),
                "{} at {x:?}, column {k}: {a:e} vs {e:e}",
                problem.name
            );
        }
    }
}

#[test]
fn smooth_default_sources() {
    check(&smooth_benchmark(), &SMOOTH_DEFAULT);
}

#[test]
fn smooth_variant_sources() {
    use MagneticVariant as B;
    use VelocityVariant as U;
    check(
        &smooth_benchmark_with(U::AsPrinted, B::Solenoidal),
        &SMOOTH_PRINTED_U,
    );
    check(
        &smooth_benchmark_with(U::Solenoidal, B::AsPrinted),
        &SMOOTH_PRINTED_B,
    );
    check(
        &smooth_benchmark_with(U::AsPrinted, B::AsPrinted),
        &SMOOTH_AS_PRINTED,
    );
}

#[test]
fn corner_sources_standard_angle() {
    check(
        &corner_benchmark_with(Omega::ThreeHalvesPi),
        &CORNER_STANDARD,
    );
}

#[test]
fn corner_sources_alternative_angle() {
    check(&corner_benchmark_with(Omega::TwoThirds), &CORNER_ALT);
}
