// Link the system OpenBLAS (which bundles LAPACK and CBLAS) for the
// lapack-sys / cblas-sys externs.
fn main() {
    let dirs = [
        "/usr/lib/x86_64-linux-gnu/openblas-pthread",
        "/usr/lib/x86_64-linux-gnu",
        "/usr/lib",
    ];
    for d in dirs {
        if std::path::Path::new(d).join("libopenblas.so").exists()
            || std::path::Path::new(d).join("libopenblas.a").exists()
        {
            println!("cargo:rustc-link-search=native={d}");
            break;
        }
    }
    println!("cargo:rustc-link-lib=openblas");
}
