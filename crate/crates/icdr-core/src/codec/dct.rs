//! 8x8 forward/inverse DCT, separable, orthonormal basis in f64.
//!
//! No fast-path approximations: determinism and conformance (round trip
//! within +/-1 after integer rounding) matter more here than speed, and the
//! separable form is already cheap enough for the pipeline's budget.

/// M[x][u] = 0.5 * c(u) * cos((2x+1) u pi / 16), c(0) = 1/sqrt(2).
/// Orthonormal: M^T M = I.
fn basis() -> [[f64; 8]; 8] {
    let mut m = [[0.0; 8]; 8];
    for (x, row) in m.iter_mut().enumerate() {
        for (u, cell) in row.iter_mut().enumerate() {
            let c = if u == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
            *cell = 0.5 * c * ((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos();
        }
    }
    m
}

fn with_basis() -> &'static [[f64; 8]; 8] {
    use std::sync::OnceLock;
    static BASIS: OnceLock<[[f64; 8]; 8]> = OnceLock::new();
    BASIS.get_or_init(basis)
}

/// Spatial block (row-major, level-shifted) -> frequency block (natural order).
pub fn forward(block: &[f64; 64]) -> [f64; 64] {
    let m = with_basis();
    let mut tmp = [0.0f64; 64];
    // T[y][u] = sum_x f[y][x] * M[x][u]
    for y in 0..8 {
        for u in 0..8 {
            let mut acc = 0.0;
            for x in 0..8 {
                acc += block[y * 8 + x] * m[x][u];
            }
            tmp[y * 8 + u] = acc;
        }
    }
    let mut out = [0.0f64; 64];
    // F[v][u] = sum_y T[y][u] * M[y][v]
    for v in 0..8 {
        for u in 0..8 {
            let mut acc = 0.0;
            for y in 0..8 {
                acc += tmp[y * 8 + u] * m[y][v];
            }
            out[v * 8 + u] = acc;
        }
    }
    out
}

/// Frequency block (natural order) -> spatial block (row-major, level-shifted).
pub fn inverse(freq: &[f64; 64]) -> [f64; 64] {
    let m = with_basis();
    let mut tmp = [0.0f64; 64];
    // G[v][x] = sum_u F[v][u] * M[x][u]
    for v in 0..8 {
        for x in 0..8 {
            let mut acc = 0.0;
            for u in 0..8 {
                acc += freq[v * 8 + u] * m[x][u];
            }
            tmp[v * 8 + x] = acc;
        }
    }
    let mut out = [0.0f64; 64];
    // f[y][x] = sum_v G[v][x] * M[y][v]
    for y in 0..8 {
        for x in 0..8 {
            let mut acc = 0.0;
            for v in 0..8 {
                acc += tmp[v * 8 + x] * m[y][v];
            }
            out[y * 8 + x] = acc;
        }
    }
    out
}
