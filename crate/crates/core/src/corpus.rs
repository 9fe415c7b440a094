//! Bundled squares used by the verification targets and the regression
//! tests, named by what their groups do.

/// Nine filled cells; the presentation reduces to one generator with no
/// relators and two symbol labels become the same word, so the square
/// embeds in no group at all.
pub const NINE_CELL: &str = "a d . .\n\
                             . a d .\n\
                             . b . c\n\
                             c . b a\n";

/// Ten filled cells; the reduced relator is equivalent to v²u⁻² and only
/// the rewriting stage uncovers the symbol collision that rules out every
/// group.
pub const TEN_CELL: &str = "a b c .\n\
                            b d . c\n\
                            c . d .\n\
                            . e . a\n";

/// Two disjoint components: an intercalate on {a, b} and a 3×3 cyclic
/// square on {c, d, e}.  It has no embedding into the cyclic group of
/// order 6, but the product construction embeds it into C2 × C3 × C3.
pub const DISCONNECTED: &str = "a b . . .\n\
                                b a . . .\n\
                                . . c d e\n\
                                . . d e c\n\
                                . . e c d\n";

/// Twelve filled cells whose presentation reduces to the one-relator
/// group b = [b, b^a]: embeds in that infinite group but in no finite
/// group.
pub const TWELVE_CELL_B: &str = ". b . c .\n\
                                 a . c . .\n\
                                 . a b . .\n\
                                 b . . . d\n\
                                 c d . . .\n\
                                 . . . b c\n";

/// Twelve filled cells reducing to the variant relator b = [b, (b⁻²)^a].
pub const TWELVE_CELL_B1: &str = "a b c d . .\n\
                                  b e . . c .\n\
                                  . . e . a d\n\
                                  . . . e . a\n";

/// Twelve filled cells reducing to the variant relator b = [b, (b²)^a].
pub const TWELVE_CELL_B2: &str = "a b c . .\n\
                                  b d . c .\n\
                                  e . . . d\n\
                                  . . d a .\n\
                                  . . . e a\n";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pls::Pls;

    #[test]
    fn corpus_squares_parse_with_expected_shapes() {
        for (text, size, connected) in [
            (NINE_CELL, 9, true),
            (TEN_CELL, 10, true),
            (DISCONNECTED, 13, false),
            (TWELVE_CELL_B, 12, true),
            (TWELVE_CELL_B1, 12, true),
            (TWELVE_CELL_B2, 12, true),
        ] {
            let p = Pls::parse(text).unwrap();
            assert_eq!(p.size(), size);
            assert_eq!(p.is_connected(), connected);
        }
    }
}
