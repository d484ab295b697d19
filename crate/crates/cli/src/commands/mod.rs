pub mod adapt;
pub mod clean;
pub mod evaluate;
pub mod report;
