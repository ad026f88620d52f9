//! Command-line front end (placeholder during bring-up).

pub fn main() -> i32 {
    0
}
