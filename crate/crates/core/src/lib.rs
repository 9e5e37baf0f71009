pub mod geometry;
pub mod los;
pub mod connectivity;
pub mod topology;
pub mod sim;
pub mod harness;
