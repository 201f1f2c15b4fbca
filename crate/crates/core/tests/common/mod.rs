pub mod dfa;
