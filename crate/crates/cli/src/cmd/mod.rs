pub mod adjust;
pub mod apply;
pub mod metrics;
pub mod oracle;
pub mod sweep;
pub mod xroc;
