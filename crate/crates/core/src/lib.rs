pub mod algebra;
pub mod simplicial;
pub mod straightening;
pub mod resolutions;
pub mod diagonal;
pub mod cohomology;
