use std::str::FromStr;
fn main() {
    let s = acfo::logic::SpecialSentence::from_str(
        "exists z1 : roots(3*t + 2) ; ring: z1^2 != 0 ; mult: z1^2 = z1",
    )
    .unwrap();
    let v = acfo::logic::decide_special(&s, 3).unwrap();
    println!("satisfiable = {}", v.is_satisfiable());
    let o = acfo::logic::oracle::standard_model_search(&s, 3, 6).unwrap();
    println!("oracle = {:?}", o.conclusive());
}
