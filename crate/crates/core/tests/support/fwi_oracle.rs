// Standard FWI equation set, transcribed separately from the library.

const EL: [f64; 12] = [
    6.5, 7.5, 9.0, 12.8, 13.9, 13.9, 12.4, 10.9, 9.4, 8.0, 7.0, 6.0,
];
const FL: [f64; 12] = [
    -1.6, -1.6, -1.6, 0.9, 3.8, 5.8, 6.4, 5.0, 2.4, 0.4, -1.6, -1.6,
];

pub fn ffmc(fo: f64, t: f64, h: f64, w: f64, ro: f64) -> f64 {
    let mut mo = 147.2 * (101.0 - fo) / (59.5 + fo);
    if ro > 0.5 {
        let rf = ro - 0.5;
        let base = 42.5 * rf * (-100.0 / (251.0 - mo)).exp() * (1.0 - (-6.93 / rf).exp());
        mo += if mo > 150.0 {
            base + 0.0015 * (mo - 150.0).powi(2) * rf.sqrt()
        } else {
            base
        };
        mo = mo.min(250.0);
    }
    let ed = 0.942 * h.powf(0.679)
        + 11.0 * ((h - 100.0) / 10.0).exp()
        + 0.18 * (21.1 - t) * (1.0 - (-0.115 * h).exp());
    let m = if mo > ed {
        let ko =
            0.424 * (1.0 - (h / 100.0).powf(1.7)) + 0.0694 * w.sqrt() * (1.0 - (h / 100.0).powi(8));
        let kd = ko * 0.581 * (0.0365 * t).exp();
        ed + (mo - ed) * 10f64.powf(-kd)
    } else {
        let ew = 0.618 * h.powf(0.753)
            + 10.0 * ((h - 100.0) / 10.0).exp()
            + 0.18 * (21.1 - t) * (1.0 - (-0.115 * h).exp());
        if mo < ew {
            let k1 = 0.424 * (1.0 - ((100.0 - h) / 100.0).powf(1.7))
                + 0.0694 * w.sqrt() * (1.0 - ((100.0 - h) / 100.0).powi(8));
            let kw = k1 * 0.581 * (0.0365 * t).exp();
            ew - (ew - mo) * 10f64.powf(-kw)
        } else {
            mo
        }
    };
    (59.5 * (250.0 - m) / (147.2 + m)).clamp(0.0, 101.0)
}

pub fn dmc(po: f64, t: f64, h: f64, ro: f64, month: usize) -> f64 {
    let t = t.max(-1.1);
    let rk = 1.894 * (t + 1.1) * (100.0 - h) * EL[month - 1] * 1e-4;
    let pr = if ro > 1.5 {
        let re = 0.92 * ro - 1.27;
        let mo = 20.0 + 280.0 / (0.023 * po).exp();
        let b = if po <= 33.0 {
            100.0 / (0.5 + 0.3 * po)
        } else if po <= 65.0 {
            14.0 - 1.3 * po.ln()
        } else {
            6.2 * po.ln() - 17.2
        };
        let mr = mo + 1000.0 * re / (48.77 + b * re);
        (43.43 * (5.6348 - (mr - 20.0).ln())).max(0.0)
    } else {
        po
    };
    (pr + rk).max(0.0)
}

pub fn dc(d0: f64, t: f64, ro: f64, month: usize) -> f64 {
    let t = t.max(-2.8);
    let pe = ((0.36 * (t + 2.8) + FL[month - 1]) / 2.0).max(0.0);
    let dr = if ro > 2.8 {
        let rd = 0.83 * ro - 1.27;
        let qo = 800.0 * (-d0 / 400.0).exp();
        let qr = qo + 3.937 * rd;
        (400.0 * (800.0 / qr).ln()).max(0.0)
    } else {
        d0
    };
    dr + pe
}

pub fn isi(ffmc: f64, w: f64) -> f64 {
    let mo = 147.2 * (101.0 - ffmc) / (59.5 + ffmc);
    let ff = 91.9 * (-0.1386 * mo).exp() * (1.0 + mo.powf(5.31) / 4.93e7);
    0.208 * (0.05039 * w).exp() * ff
}

pub fn bui(p: f64, d: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    let u = if p <= 0.4 * d {
        0.8 * p * d / (p + 0.4 * d)
    } else {
        p - (1.0 - 0.8 * d / (p + 0.4 * d)) * (0.92 + (0.0114 * p).powf(1.7))
    };
    u.max(0.0)
}

pub fn fwi(r: f64, u: f64) -> f64 {
    let fd = if u <= 80.0 {
        0.626 * u.powf(0.809) + 2.0
    } else {
        1000.0 / (25.0 + 108.64 * (-0.023 * u).exp())
    };
    let b = 0.1 * r * fd;
    if b > 1.0 {
        (2.72 * (0.434 * b.ln()).powf(0.647)).exp()
    } else {
        b
    }
}
