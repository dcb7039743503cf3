pub mod amplifier;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod hamiltonian;
pub mod io;
pub mod wavepacket;
