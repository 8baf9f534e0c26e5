pub mod closeness;
pub mod convergence;
pub mod painleve;
pub mod simulate;
pub mod sweep;
