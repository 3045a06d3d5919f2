//! Source generators for the benchmark problems.

use std::fmt::Write;
use std::str::FromStr;

use thiserror::Error;

/// The three templates, in the order the generated files declare them.
pub const TEMPLATES: &str = "\
rec filter(p) = lambda (xs)
    (if xs = nil
    then nil
    else
        if (p(head(xs)))
        then head(xs):filter(p)(tail(xs))
        else filter(p)(tail(xs))) ;;
rec map(f) = lambda (xs)
    (if xs = nil
    then nil
    else f(head(xs)):map(f)(tail(xs))) ;;
val comp(f, g) = lambda (x) f(g(x)) ;;
";

const REVERSE: &str = "\
rec _revAcc(acc) = lambda (xs) (if xs = nil then acc else _revAcc(head(xs) : acc)(tail(xs))) ;;
val BK_reverse(xs) = _revAcc(nil)(xs) ;;
";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BenchProblem {
    AddN(u32),
    FilterUpNum,
    AddRevFilter,
    Maze { size: u32, blocked: Vec<(u32, u32)> },
    DropLasts { noise: u32 },
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("unknown problem `{0}` (expected add<N>, filterUpNum, addRevFilter, maze<size> or droplasts<noise>)")]
pub struct UnknownProblem(pub String);

impl FromStr for BenchProblem {
    type Err = UnknownProblem;

    fn from_str(s: &str) -> Result<Self, UnknownProblem> {
        let err = || UnknownProblem(s.to_string());
        let number = |rest: &str| rest.parse::<u32>().map_err(|_| err());
        match s {
            "filterUpNum" => Ok(BenchProblem::FilterUpNum),
            "addRevFilter" => Ok(BenchProblem::AddRevFilter),
            "droplasts" | "dropLasts" => Ok(BenchProblem::DropLasts { noise: 0 }),
            _ => {
                if let Some(rest) = s.strip_prefix("add") {
                    let n = number(rest)?;
                    if n == 0 {
                        return Err(err());
                    }
                    Ok(BenchProblem::AddN(n))
                } else if let Some(rest) = s.strip_prefix("maze") {
                    // maze4 and maze4x4 are both accepted
                    let size = match rest.split_once('x') {
                        Some((a, b)) if a == b => number(a)?,
                        Some(_) => return Err(err()),
                        None => number(rest)?,
                    };
                    if size < 2 {
                        return Err(err());
                    }
                    Ok(BenchProblem::Maze { size, blocked: Vec::new() })
                } else if let Some(rest) = s.strip_prefix("droplasts").or_else(|| s.strip_prefix("dropLasts")) {
                    Ok(BenchProblem::DropLasts { noise: number(rest)? })
                } else {
                    Err(err())
                }
            }
        }
    }
}

impl std::fmt::Display for BenchProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BenchProblem::AddN(n) => write!(f, "add{n}"),
            BenchProblem::FilterUpNum => f.write_str("filterUpNum"),
            BenchProblem::AddRevFilter => f.write_str("addRevFilter"),
            BenchProblem::Maze { size, .. } => write!(f, "maze{size}x{size}"),
            BenchProblem::DropLasts { noise } => write!(f, "droplasts{noise}"),
        }
    }
}

impl BenchProblem {
    /// Source text of the problem file.
    pub fn source(&self) -> String {
        match self {
            BenchProblem::AddN(n) => add_n(*n),
            BenchProblem::FilterUpNum => filter_up_num(),
            BenchProblem::AddRevFilter => add_rev_filter(),
            BenchProblem::Maze { size, blocked } => maze(*size, blocked),
            BenchProblem::DropLasts { noise } => droplasts(*noise),
        }
    }
}

fn add_n(n: u32) -> String {
    let n = n as i64;
    // negatives add something other than n
    let wrong: [i64; 2] = match n {
        1 => [2, 3],
        2 => [1, 3],
        _ => [1, 2],
    };
    let mut s = String::from(TEMPLATES);
    s.push_str("val BK_add1(x) = x + 1 ;;\n");
    writeln!(s, "PEx (1) => {} ;;", 1 + n).unwrap();
    writeln!(s, "PEx (7) => {} ;;", 7 + n).unwrap();
    writeln!(s, "NEx (1) => {} ;;", 1 + wrong[0]).unwrap();
    writeln!(s, "NEx (3) => {} ;;", 3 + wrong[1]).unwrap();
    s.push_str("Synthesize (Int) => Int ;;\n");
    s
}

fn filter_up_num() -> String {
    let mut s = String::from(TEMPLATES);
    s.push_str(
        "\
val BK_isUpper(c) = isUpper(c) ;;
val BK_isAlpha(c) = isAlpha(c) ;;
val BK_isNum(c) = isNum(c) ;;
val BK_not(b) = not(b) ;;
PEx ['a', 'B', '3', 'c'] => ['a', 'c'] ;;
PEx ['X', 'y', '7', 'z', 'Q', '0'] => ['y', 'z'] ;;
NEx ['a', 'B', '3'] => ['a', '3'] ;;
NEx ['a', 'B', '3'] => ['a', 'B'] ;;
Synthesize ([Char]) => [Char] ;;
",
    );
    s
}

fn add_rev_filter() -> String {
    let mut s = String::from(TEMPLATES);
    s.push_str(
        "\
val BK_add1(x) = x + 1 ;;
val BK_add2(x) = x + 2 ;;
rec BK_isOdd(n) = if n < 2 then n = 1 else BK_isOdd(n - 2) ;;
",
    );
    s.push_str(REVERSE);
    s.push_str(
        "\
PEx [1, 2, 3] => [7, 5] ;;
PEx [4, 5, 6, 7, 8] => [11, 9] ;;
NEx [1, 2, 3] => [5, 7] ;;
NEx [1, 2, 3] => [5, 3] ;;
Synthesize ([Int]) => [Int] ;;
",
    );
    s
}

/// The move `name` shifts coordinate `axis` (0 = x, 1 = y) by `delta`.
/// Moves off the grid or into a blocked cell leave the position unchanged.
fn maze_move(name: &str, axis: usize, delta: i64, size: u32, blocked: &[(u32, u32)]) -> String {
    let x = "head(p)";
    let y = "head(tail(p))";
    let coord = if axis == 0 { x } else { y };
    let in_bounds = if delta > 0 {
        format!("{coord} < {}", size - 1)
    } else {
        format!("0 < {coord}")
    };
    let op = if delta > 0 { "+" } else { "-" };
    let moved = if axis == 0 {
        format!("[{x} {op} 1, {y}]")
    } else {
        format!("[{x}, {y} {op} 1]")
    };
    let mut target = moved.clone();
    for (bx, by) in blocked.iter().rev() {
        target = format!("(if {moved} = [{bx}, {by}] then p else {target})");
    }
    format!("val BK_{name}(p) = if {in_bounds} then {target} else p ;;\n")
}

fn maze(size: u32, blocked: &[(u32, u32)]) -> String {
    let mut s = String::from(TEMPLATES);
    s.push_str(&maze_move("mRight", 0, 1, size, blocked));
    s.push_str(&maze_move("mLeft", 0, -1, size, blocked));
    s.push_str(&maze_move("mDown", 1, -1, size, blocked));
    s.push_str(&maze_move("mUp", 1, 1, size, blocked));
    writeln!(s, "PEx [0, 0] => [{0}, {0}] ;;", size - 1).unwrap();
    s.push_str("Synthesize ([Int]) => [Int] ;;\n");
    s
}

fn droplasts(noise: u32) -> String {
    let mut s = String::from(TEMPLATES);
    s.push_str(REVERSE);
    s.push_str("val BK_tail(xs) = tail(xs) ;;\n");
    for i in 1..=noise {
        writeln!(s, "val BK_id{i}(x) = x ;;").unwrap();
    }
    s.push_str(
        "\
PEx [[1, 2, 3], [4, 5], [6, 7, 8]] => [[1, 2], [4]] ;;
PEx [[1, 2], [3, 4, 5, 6], [7], [8, 9]] => [[1], [3, 4, 5], []] ;;
NEx [[1, 2, 3], [4, 5], [6, 7, 8]] => [[1, 2, 3], [4, 5]] ;;
NEx [[1, 2, 3], [4, 5], [6, 7, 8]] => [[1, 2], [4], [6, 7]] ;;
Synthesize ([[Int]]) => [[Int]] ;;
",
    );
    s
}
