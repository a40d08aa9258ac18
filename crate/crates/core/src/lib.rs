//! Core engine for serious-illness communication training.

pub mod analysis;
pub mod dialogue;
pub mod feedback;
pub mod rubric;
pub mod skill;
pub mod stats;
pub mod text;
pub mod transcript;
