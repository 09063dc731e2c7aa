pub mod cli;
pub mod cmv;
pub mod comb_map;
pub mod cx;
pub mod domain;
pub mod error;
pub mod jacobi_recon;
pub mod ode;
pub mod oracle;
pub mod quad;
pub mod schrodinger_jacobi;
pub mod translation_flow;
pub mod verify;
pub mod weyl_m;
