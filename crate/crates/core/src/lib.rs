//! Compile asynchronous message-passing protocols into synchronous ones that
//! survive a bounded number of adversarial bit flips on private channels.

pub mod bits;
pub mod coding;
pub mod netsim;
pub mod exchange;
pub mod compiler;
pub mod adversaries;
pub mod harness;
