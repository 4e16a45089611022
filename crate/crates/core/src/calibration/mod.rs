//! Calibration of the two-asset OU-Wishart model to FX call quotes, and the
//! Variance Gamma benchmark models.

pub mod black;
pub mod fit;
pub mod optimizer;
pub mod params_io;
pub mod quotes;
pub mod vg;

pub use black::{gk_call, implied_vol};
pub use fit::{
    calibrate, default_initial, model_price, model_prices, model_smile, pair_conventions, price_option, rmse, synthetic_quotes, CalibConfig, CalibrationData, CalibrationReport, Variant,
    Weighting,
};
pub use params_io::{load_model, save_model, Market, ModelFile, PairKind};
pub use quotes::{read_quotes_csv, write_quotes_csv, OptionQuote};
pub use vg::{vg_mgf, vgou_mgf, Rates, VgOuParams, VgParams};
