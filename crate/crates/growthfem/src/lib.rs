pub mod config;
pub mod continuation;
pub mod drivers;
pub mod error;
pub mod io;
pub mod linear;
pub mod newton;
pub mod verify;
