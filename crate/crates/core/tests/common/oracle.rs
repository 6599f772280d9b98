/// Textbook bubble sort written out longhand. Logs `(left, right, swapped)`
/// for every comparison of every pass, plus whether the pass swapped.
pub fn bubble_oracle(values: &[i64]) -> (Vec<(Vec<(usize, usize, bool)>, bool)>, Vec<i64>) {
    let mut a = values.to_vec();
    let mut passes = Vec::new();
    loop {
        let mut log = Vec::new();
        let mut any = false;
        let mut i = 0;
        while i + 1 < a.len() {
            if a[i] > a[i + 1] {
                let t = a[i];
                a[i] = a[i + 1];
                a[i + 1] = t;
                log.push((i, i + 1, true));
                any = true;
            } else {
                log.push((i, i + 1, false));
            }
            i += 1;
        }
        passes.push((log, !any));
        if !any {
            return (passes, a);
        }
    }
}

pub fn permutations(n: usize) -> Vec<Vec<i64>> {
    fn go(prefix: &mut Vec<i64>, rest: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (1..=n as i64).collect(), &mut out);
    out
}
