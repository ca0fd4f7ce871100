fn main() {
    println!("shs");
}
