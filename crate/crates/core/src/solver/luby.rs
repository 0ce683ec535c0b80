/// The `i`-th element (1-based) of the Luby sequence 1, 1, 2, 1, 1, 2, 4, ...
///
/// `luby(i) = 2^(k-1)` if `i = 2^k - 1`, otherwise
/// `luby(i - 2^(k-1) + 1)` for the `k` with `2^(k-1) <= i < 2^k - 1`.
pub fn luby(i: u64) -> u64 {
    assert!(i >= 1, "luby is 1-indexed");
    let mut i = i;
    loop {
        // Smallest k with i <= 2^k - 1.
        let mut k = 1u32;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
        if i == (1u64 << k) - 1 {
            return 1u64 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
    }
}
