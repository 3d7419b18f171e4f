//! Numeric verification of the heat- and wave-equation balance theorems on
//! supplied fields: both sides of each balance law are evaluated eps-wise
//! from their defining finite-increment expressions and compared with
//! order-tagged equality. Verification, not derivation.

mod heat;
mod wave;

pub use heat::{
    choose_heat_increments, heat_balance, heat_order_table, HeatFields, HeatIncrements,
    HeatVerdict,
};
pub use wave::{string_length_check, wave_balance, StringLengthReport, WaveSetup, WaveVerdict};
