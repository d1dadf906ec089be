#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod device;
pub mod error;
pub mod fitting;
pub mod physics;
pub mod response;
pub mod tripartite;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/units-and-config.md")]
    mod units_and_config {}
    #[doc = include_str!("../../../book/src/linear-response.md")]
    mod linear_response {}
    #[doc = include_str!("../../../book/src/tripartite.md")]
    mod tripartite {}
    #[doc = include_str!("../../../book/src/fitting.md")]
    mod fitting {}
    #[doc = include_str!("../../../book/src/device.md")]
    mod device {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
