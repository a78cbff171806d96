use mahler_core::examples::rs_operator;
use mahler_core::reduction::solution_basis;
use mahler_core::scalar::qi;

fn main() {
    let op = rs_operator();
    let basis = solution_basis(&op, &qi(12)).unwrap();
    for (k, y) in basis.iter().enumerate() {
        println!("y{k} = {y}\n");
    }
}
