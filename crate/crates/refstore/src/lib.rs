pub mod equiv;
pub mod gen;
pub mod guarded;
pub mod interp;
pub mod rewrite;
pub mod store;
pub mod syntax;
pub mod typecheck;
