pub mod bp;
pub mod emd;
pub mod smc;
pub mod spcp;
