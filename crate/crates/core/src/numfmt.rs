/// Formats a double with 17 significant digits in scientific notation.
/// Round-trips exactly and ignores locale.
pub fn sig17(x: f64) -> String {
    if x == 0.0 {
        // keep the sign of negative zero out of result files
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [1.0, -0.1, std::f64::consts::PI, 1e-300, 6.02214076e23] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(sig17(-0.0), sig17(0.0));
    }
}
