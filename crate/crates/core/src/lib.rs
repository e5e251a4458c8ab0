pub mod dp;
pub mod product;
pub mod qlearn;
pub mod quantize;
pub mod scltl;
pub mod system;
