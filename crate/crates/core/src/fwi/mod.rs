//! Canadian Fire Weather Index System (Van Wagner 1987 equation set).
//!
//! Three moisture codes carry state from one day to the next:
//!
//! ```text
//!   temp, rh, wind, rain ──► FFMC ──┐
//!   temp, rh, rain, month ─► DMC ──┼─► BUI ──┐
//!   temp, rain, month ────► DC ───┘         ├─► FWI
//!   wind ──────────────────────────► ISI ───┘
//! ```
//!
//! All functions validate their inputs and are generic over [`Scalar`].

mod bands;

use thiserror::Error;

use crate::Scalar;

pub use bands::{
    classify, Band, BandError, ClassBands, DangerClassification, Quantity, QuantityBands,
    TriggerPredicate, DEFAULT_BANDS_CONFIG,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FwiError {
    #[error("{name} = {value} out of range")]
    OutOfRange { name: &'static str, value: f64 },
}

pub type Result<T, E = FwiError> = std::result::Result<T, E>;

/// Day-length factors for the DMC drying rate, January to December.
const DMC_DAY_LENGTH: [f64; 12] = [
    6.5, 7.5, 9.0, 12.8, 13.9, 13.9, 12.4, 10.9, 9.4, 8.0, 7.0, 6.0,
];
/// Day-length adjustments for DC potential evapotranspiration.
const DC_DAY_LENGTH: [f64; 12] = [
    -1.6, -1.6, -1.6, 0.9, 3.8, 5.8, 6.4, 5.0, 2.4, 0.4, -1.6, -1.6,
];

/// Noon weather observations feeding one daily update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwiInputs<T> {
    /// °C
    pub temp: T,
    /// Relative humidity, %.
    pub rh: T,
    /// km/h
    pub wind: T,
    /// 24-hour rainfall, mm.
    pub rain: T,
    /// 1-12
    pub month: u8,
}

impl<T: Scalar> FwiInputs<T> {
    pub fn new(temp: T, rh: T, wind: T, rain: T, month: u8) -> Self {
        FwiInputs {
            temp,
            rh,
            wind,
            rain,
            month,
        }
    }

    fn validate(&self) -> Result<()> {
        check("temp", self.temp, f64::NEG_INFINITY, f64::INFINITY)?;
        check("rh", self.rh, 0.0, 100.0)?;
        check("wind", self.wind, 0.0, f64::INFINITY)?;
        check("rain", self.rain, 0.0, f64::INFINITY)?;
        if !(1..=12).contains(&self.month) {
            return Err(FwiError::OutOfRange {
                name: "month",
                value: self.month as f64,
            });
        }
        Ok(())
    }
}

/// The six codes and indices of the system.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FwiCodes<T> {
    pub ffmc: T,
    pub dmc: T,
    pub dc: T,
    pub isi: T,
    pub bui: T,
    pub fwi: T,
}

impl<T: Scalar> FwiCodes<T> {
    /// Completes ISI-derived quantities from the three moisture codes, an ISI
    /// and the BUI/FWI formulas. Used for records that carry FFMC/DMC/DC/ISI
    /// but not BUI/FWI.
    pub fn from_observed(ffmc: T, dmc: T, dc: T, isi: T) -> Result<Self> {
        check("ffmc", ffmc, 0.0, 101.0)?;
        check("isi", isi, 0.0, f64::INFINITY)?;
        let b = bui(dmc, dc)?;
        let f = fwi(isi, b)?;
        Ok(FwiCodes {
            ffmc,
            dmc,
            dc,
            isi,
            bui: b,
            fwi: f,
        })
    }

    pub fn get(&self, q: Quantity) -> T {
        match q {
            Quantity::Ffmc => self.ffmc,
            Quantity::Dmc => self.dmc,
            Quantity::Dc => self.dc,
            Quantity::Isi => self.isi,
            Quantity::Bui => self.bui,
            Quantity::Fwi => self.fwi,
        }
    }
}

/// Moisture codes assumed on the first day of a season.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartupCodes<T> {
    pub ffmc: T,
    pub dmc: T,
    pub dc: T,
}

impl<T: Scalar> Default for StartupCodes<T> {
    fn default() -> Self {
        StartupCodes {
            ffmc: T::lit(85.0),
            dmc: T::lit(6.0),
            dc: T::lit(15.0),
        }
    }
}

/// Carries the three moisture codes across days.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwiState<T> {
    codes: StartupCodes<T>,
}

impl<T: Scalar> FwiState<T> {
    pub fn new(startup: StartupCodes<T>) -> Self {
        FwiState { codes: startup }
    }

    /// Advances one day and returns the full set of codes for that day.
    pub fn step(&mut self, inputs: &FwiInputs<T>) -> Result<FwiCodes<T>> {
        let ffmc = update_ffmc(self.codes.ffmc, inputs)?;
        let dmc = update_dmc(self.codes.dmc, inputs)?;
        let dc = update_dc(self.codes.dc, inputs)?;
        let isi = isi(ffmc, inputs.wind)?;
        let bui = bui(dmc, dc)?;
        let fwi = fwi(isi, bui)?;
        self.codes = StartupCodes { ffmc, dmc, dc };
        Ok(FwiCodes {
            ffmc,
            dmc,
            dc,
            isi,
            bui,
            fwi,
        })
    }
}

impl<T: Scalar> Default for FwiState<T> {
    fn default() -> Self {
        FwiState::new(StartupCodes::default())
    }
}

fn check<T: Scalar>(name: &'static str, v: T, lo: f64, hi: f64) -> Result<()> {
    let f = v.as_f64();
    if !f.is_finite() || f < lo || f > hi {
        return Err(FwiError::OutOfRange { name, value: f });
    }
    Ok(())
}

fn lit<T: Scalar>(v: f64) -> T {
    T::lit(v)
}

/// FFMC → fine fuel moisture content (%).
fn ffmc_to_moisture<T: Scalar>(ffmc: T) -> T {
    lit::<T>(147.2) * (lit::<T>(101.0) - ffmc) / (lit::<T>(59.5) + ffmc)
}

/// Today's Fine Fuel Moisture Code from yesterday's and noon weather.
pub fn update_ffmc<T: Scalar>(prev_ffmc: T, w: &FwiInputs<T>) -> Result<T> {
    check("prev_ffmc", prev_ffmc, 0.0, 101.0)?;
    w.validate()?;
    let (temp, rh, wind, rain) = (w.temp, w.rh, w.wind, w.rain);
    let one = T::one();

    let mut mo = ffmc_to_moisture(prev_ffmc);
    if rain > lit(0.5) {
        let rf = rain - lit(0.5);
        let wetting = lit::<T>(42.5)
            * rf
            * (lit::<T>(-100.0) / (lit::<T>(251.0) - mo)).exp()
            * (one - (lit::<T>(-6.93) / rf).exp());
        mo = if mo > lit(150.0) {
            let over = mo - lit(150.0);
            mo + wetting + lit::<T>(0.0015) * over * over * rf.sqrt()
        } else {
            mo + wetting
        };
        mo = mo.min(lit(250.0));
    }

    let humid = ((rh - lit(100.0)) / lit(10.0)).exp();
    let temp_term =
        lit::<T>(0.18) * (lit::<T>(21.1) - temp) * (one - (lit::<T>(-0.115) * rh).exp());
    let drying_emc = lit::<T>(0.942) * rh.powf(lit(0.679)) + lit::<T>(11.0) * humid + temp_term;
    let wetting_emc = lit::<T>(0.618) * rh.powf(lit(0.753)) + lit::<T>(10.0) * humid + temp_term;

    let log_rate = |h: T| -> T {
        let base = lit::<T>(0.424) * (one - h.powf(lit(1.7)))
            + lit::<T>(0.0694) * wind.sqrt() * (one - h.powi(8));
        base * lit::<T>(0.581) * (lit::<T>(0.0365) * temp).exp()
    };
    let ten = lit::<T>(10.0);
    let m = if mo > drying_emc {
        let kd = log_rate(rh / lit(100.0));
        drying_emc + (mo - drying_emc) * ten.powf(-kd)
    } else if mo < wetting_emc {
        let kw = log_rate((lit::<T>(100.0) - rh) / lit(100.0));
        wetting_emc - (wetting_emc - mo) * ten.powf(-kw)
    } else {
        mo
    };

    let ffmc = lit::<T>(59.5) * (lit::<T>(250.0) - m) / (lit::<T>(147.2) + m);
    Ok(ffmc.max(T::zero()).min(lit(101.0)))
}

/// Today's Duff Moisture Code.
pub fn update_dmc<T: Scalar>(prev_dmc: T, w: &FwiInputs<T>) -> Result<T> {
    check("prev_dmc", prev_dmc, 0.0, f64::INFINITY)?;
    w.validate()?;
    let temp = w.temp.max(lit(-1.1));
    let day_length = lit::<T>(DMC_DAY_LENGTH[w.month as usize - 1]);
    let drying =
        lit::<T>(1.894) * (temp + lit(1.1)) * (lit::<T>(100.0) - w.rh) * day_length * lit(1e-4);

    let after_rain = if w.rain > lit(1.5) {
        let effective = lit::<T>(0.92) * w.rain - lit(1.27);
        let moisture = lit::<T>(20.0) + lit::<T>(280.0) / (lit::<T>(0.023) * prev_dmc).exp();
        let slope = if prev_dmc <= lit(33.0) {
            lit::<T>(100.0) / (lit::<T>(0.5) + lit::<T>(0.3) * prev_dmc)
        } else if prev_dmc <= lit(65.0) {
            lit::<T>(14.0) - lit::<T>(1.3) * prev_dmc.ln()
        } else {
            lit::<T>(6.2) * prev_dmc.ln() - lit(17.2)
        };
        let wetted =
            moisture + lit::<T>(1000.0) * effective / (lit::<T>(48.77) + slope * effective);
        (lit::<T>(43.43) * (lit::<T>(5.6348) - (wetted - lit(20.0)).ln())).max(T::zero())
    } else {
        prev_dmc
    };
    Ok((after_rain + drying).max(T::zero()))
}

/// Today's Drought Code.
pub fn update_dc<T: Scalar>(prev_dc: T, w: &FwiInputs<T>) -> Result<T> {
    check("prev_dc", prev_dc, 0.0, f64::INFINITY)?;
    w.validate()?;
    let temp = w.temp.max(lit(-2.8));
    let adjust = lit::<T>(DC_DAY_LENGTH[w.month as usize - 1]);
    let evapotranspiration =
        ((lit::<T>(0.36) * (temp + lit(2.8)) + adjust) / lit(2.0)).max(T::zero());

    let after_rain = if w.rain > lit(2.8) {
        let effective = lit::<T>(0.83) * w.rain - lit(1.27);
        let moisture = lit::<T>(800.0) * (-prev_dc / lit(400.0)).exp();
        let wetted =
            prev_dc - lit::<T>(400.0) * (T::one() + lit::<T>(3.937) * effective / moisture).ln();
        wetted.max(T::zero())
    } else {
        prev_dc
    };
    Ok((after_rain + evapotranspiration).max(T::zero()))
}

/// Initial Spread Index from FFMC and wind speed.
pub fn isi<T: Scalar>(ffmc: T, wind: T) -> Result<T> {
    check("ffmc", ffmc, 0.0, 101.0)?;
    check("wind", wind, 0.0, f64::INFINITY)?;
    let m = ffmc_to_moisture(ffmc);
    let fine_fuel = lit::<T>(91.9)
        * (lit::<T>(-0.1386) * m).exp()
        * (T::one() + m.powf(lit(5.31)) / lit(4.93e7));
    let wind_fn = (lit::<T>(0.05039) * wind).exp();
    Ok(lit::<T>(0.208) * wind_fn * fine_fuel)
}

/// Buildup Index from DMC and DC.
pub fn bui<T: Scalar>(dmc: T, dc: T) -> Result<T> {
    check("dmc", dmc, 0.0, f64::INFINITY)?;
    check("dc", dc, 0.0, f64::INFINITY)?;
    if dmc == T::zero() {
        return Ok(T::zero());
    }
    let ratio = lit::<T>(0.8) * dc / (dmc + lit::<T>(0.4) * dc);
    let u = if dmc <= lit::<T>(0.4) * dc {
        ratio * dmc
    } else {
        dmc - (T::one() - ratio) * (lit::<T>(0.92) + (lit::<T>(0.0114) * dmc).powf(lit(1.7)))
    };
    Ok(u.max(T::zero()))
}

/// Fire Weather Index from ISI and BUI.
pub fn fwi<T: Scalar>(isi: T, bui: T) -> Result<T> {
    check("isi", isi, 0.0, f64::INFINITY)?;
    check("bui", bui, 0.0, f64::INFINITY)?;
    let duff = if bui <= lit(80.0) {
        lit::<T>(0.626) * bui.powf(lit(0.809)) + lit(2.0)
    } else {
        lit::<T>(1000.0) / (lit::<T>(25.0) + lit::<T>(108.64) * (lit::<T>(-0.023) * bui).exp())
    };
    let b = lit::<T>(0.1) * isi * duff;
    if b > T::one() {
        Ok((lit::<T>(2.72) * (lit::<T>(0.434) * b.ln()).powf(lit(0.647))).exp())
    } else {
        Ok(b)
    }
}
