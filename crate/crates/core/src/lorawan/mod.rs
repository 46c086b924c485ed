//! LoRaWAN channel model: airtime, link budget, collisions and loss traces.

pub mod cell;
pub mod collision;
pub mod link;
pub mod phy;
pub mod topology;
pub mod trace;

pub use cell::{cell_psr, channel_sweep, packets_per_area_hour, write_sweep_csv, CellPsr, ChannelConfig};
pub use collision::{collision_psr, CollisionEstimate};
pub use link::{assign_sf, bit_error_rate, link_quality_psr, q_function, LinkBudget};
pub use phy::{airtime, payload_symbols, RadioParams};
pub use topology::{area_centers, CellNode, CellTopology};
pub use trace::{sample_loss_trace, UplinkSchedule};
