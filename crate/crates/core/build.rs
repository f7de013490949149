fn main() {
    // LAPACK and CBLAS symbols both come from the system OpenBLAS.
    println!("cargo:rustc-link-lib=openblas");
}
