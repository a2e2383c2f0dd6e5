use tbrkernel::reduce::exhaustively_reduce;
use tbrkernel::search::{maf_search, SearchOutcome};
use tbrkernel::tight::tight_family;
use std::time::Instant;

fn main() {
    for k in [5, 6] {
        let (t1, t2) = tight_family(k).unwrap();
        println!("k={k}: {} taxa (want {})", t1.leaf_count(), 11 * k - 9);
        let (_r1, _r2, trace) = exhaustively_reduce(&t1, &t2).unwrap();
        println!("  reduction steps: {}", trace.steps.len());
        let start = Instant::now();
        match maf_search(&t1, &t2, k - 1).unwrap() {
            SearchOutcome::BudgetExceeded => println!("  budget {} exceeded ok [{:?}]", k - 1, start.elapsed()),
            SearchOutcome::Found { size, .. } => println!("  FOUND {size} at {} BAD [{:?}]", k - 1, start.elapsed()),
        }
        let start = Instant::now();
        match maf_search(&t1, &t2, k).unwrap() {
            SearchOutcome::BudgetExceeded => println!("  budget {k} exceeded BAD [{:?}]", start.elapsed()),
            SearchOutcome::Found { size, .. } => println!("  found size {size} at budget {k} ok [{:?}]", start.elapsed()),
        }
    }
}
