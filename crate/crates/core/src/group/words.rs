//! Free-group words over letters `+-1 ..= +-n` (generator `k` is letter
//! `k+1`, its inverse `-(k+1)`; `0` is not a letter).

/// Freely reduce: cancel adjacent inverse pairs.
pub fn free_reduce(word: &[i32]) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::with_capacity(word.len());
    for &x in word {
        if x == 0 {
            continue;
        }
        if out.last().is_some_and(|&y| y == -x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

pub fn inverse_word(word: &[i32]) -> Vec<i32> {
    word.iter().rev().map(|&x| -x).collect()
}

/// Reduce and then strip conjugating prefix/suffix pairs until the word is
/// cyclically reduced (first letter is not the inverse of the last).
pub fn cyclic_reduce(word: &[i32]) -> Vec<i32> {
    let mut w = free_reduce(word);
    while w.len() >= 2 && w[0] == -w[w.len() - 1] {
        w.pop();
        w.remove(0);
    }
    w
}

pub fn is_cyclically_reduced(word: &[i32]) -> bool {
    let reduced = free_reduce(word);
    reduced.len() == word.len()
        && (word.len() < 2 || word[0] != -word[word.len() - 1])
}

/// Lexicographically minimal cyclic rotation (canonical conjugacy-class key
/// for cyclically reduced words).
pub fn canonical_rotation(word: &[i32]) -> Vec<i32> {
    if word.is_empty() {
        return Vec::new();
    }
    let n = word.len();
    let mut best: Vec<i32> = word.to_vec();
    for i in 1..n {
        let rot: Vec<i32> = word[i..].iter().chain(&word[..i]).copied().collect();
        if rot < best {
            best = rot;
        }
    }
    best
}

/// Smallest period of the cyclic word (`n` for primitive words).
pub fn smallest_period(word: &[i32]) -> usize {
    let n = word.len();
    for p in 1..n {
        if n % p == 0 && (0..n).all(|i| word[i] == word[(i + p) % n]) {
            return p;
        }
    }
    n
}

pub fn is_primitive(word: &[i32]) -> bool {
    !word.is_empty() && smallest_period(word) == word.len()
}

/// All freely reduced words of exactly `len` letters over `n_gens` generators.
pub fn reduced_words_of_length(n_gens: usize, len: usize) -> Vec<Vec<i32>> {
    let letters: Vec<i32> = (1..=n_gens as i32)
        .flat_map(|k| [k, -k])
        .collect();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<i32>> = vec![Vec::new()];
    while let Some(w) = stack.pop() {
        if w.len() == len {
            out.push(w);
            continue;
        }
        for &l in &letters {
            if w.last().is_some_and(|&y| y == -l) {
                continue;
            }
            let mut next = w.clone();
            next.push(l);
            stack.push(next);
        }
    }
    out.sort();
    out
}
