use super::tm::{Symbol, BLANK};

/// Dense two-way tape that grows on demand.
#[derive(Debug, Clone)]
pub(crate) struct Tape {
    cells: Vec<Symbol>,
    // index of square 0 inside `cells`
    origin: i64,
}

impl Tape {
    pub(crate) fn new(input: &[Symbol]) -> Self {
        let mut cells = vec![BLANK; input.len().max(1) + 32];
        cells[16..16 + input.len()].copy_from_slice(input);
        Self { cells, origin: 16 }
    }

    #[inline]
    pub(crate) fn read(&self, square: i64) -> Symbol {
        let idx = square + self.origin;
        if idx < 0 || idx as usize >= self.cells.len() {
            BLANK
        } else {
            self.cells[idx as usize]
        }
    }

    #[inline]
    pub(crate) fn write(&mut self, square: i64, symbol: Symbol) {
        let idx = self.reserve(square);
        self.cells[idx] = symbol;
    }

    fn reserve(&mut self, square: i64) -> usize {
        let mut idx = square + self.origin;
        if idx < 0 {
            let grow = (-idx as usize).max(self.cells.len());
            let mut cells = vec![BLANK; grow + self.cells.len()];
            cells[grow..].copy_from_slice(&self.cells);
            self.cells = cells;
            self.origin += grow as i64;
            idx = square + self.origin;
        } else if idx as usize >= self.cells.len() {
            let needed = idx as usize + 1;
            let len = needed.max(2 * self.cells.len());
            self.cells.resize(len, BLANK);
        }
        idx as usize
    }

    /// Non-blank extent as `(leftmost, rightmost)` squares.
    pub(crate) fn extent(&self) -> Option<(i64, i64)> {
        let lo = self.cells.iter().position(|&s| s != BLANK)?;
        let hi = self.cells.iter().rposition(|&s| s != BLANK)?;
        Some((lo as i64 - self.origin, hi as i64 - self.origin))
    }

    /// Leftmost to rightmost non-blank square.
    pub(crate) fn segment(&self) -> Vec<Symbol> {
        match self.extent() {
            Some((lo, hi)) => (lo..=hi).map(|x| self.read(x)).collect(),
            None => Vec::new(),
        }
    }

    /// Symbols on squares `lo..=hi`.
    pub(crate) fn window(&self, lo: i64, hi: i64) -> Vec<Symbol> {
        (lo..=hi).map(|x| self.read(x)).collect()
    }
}
