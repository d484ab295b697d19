/// Unit-cost edit distance (insert, delete, substitute) over Unicode scalar
/// values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub(crate) fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (j, lc) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = j + 1;
        for (i, sc) in short.iter().enumerate() {
            let above = row[i + 1];
            row[i + 1] = if sc == lc {
                diag
            } else {
                1 + diag.min(above).min(row[i])
            };
            diag = above;
        }
    }
    row[short.len()]
}
