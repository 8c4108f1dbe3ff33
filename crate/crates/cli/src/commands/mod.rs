pub mod cheeger;
pub mod disorder;
pub mod kuramoto;
pub mod product;
pub mod qlbit;
pub mod source;
pub mod spectrum;
pub mod witness;
