/// Source of stored weight bit patterns during inference.
///
/// Patterns are `word_bits` wide, right-aligned in a `u16`, two's complement.
/// A forward pass fetches every `(bank, row, col)` exactly once, through
/// [`WeightStore::read_bank`].
pub trait WeightStore {
    fn read(&self, bank: usize, row: usize, col: usize) -> u16;

    /// Fills `out` (row-major, `rows * cols`) with one read of every word in `bank`.
    fn read_bank(&self, bank: usize, shape: (usize, usize), out: &mut [u16]) {
        let (rows, cols) = shape;
        debug_assert_eq!(out.len(), rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                out[r * cols + c] = self.read(bank, r, c);
            }
        }
    }

    /// True when successive reads of the same word may differ, so every
    /// inference must re-fetch its weights.
    fn per_access(&self) -> bool {
        false
    }
}
