//! Learning bid lists of strong-substitutes valuations from demand queries.

pub mod arrangement;
pub mod bids;
pub mod bridge;
pub mod cli;
pub mod error;
pub mod gadgets;
pub mod hull;
pub mod learn_general;
pub mod learn_positive;
pub mod oracle;
pub mod point;
pub mod queries;
pub mod validity;

pub use bids::{bidlists_equal, Bid, BidList, Instance};
pub use error::{Error, Result};
pub use oracle::{DemandOracle, DemandQuery, QueryCategory, QueryLedger};
pub use point::{Bundle, ExtRational, Rational, RationalPoint};
