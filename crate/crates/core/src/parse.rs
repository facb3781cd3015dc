//! Small helpers for `name(arg, ...)` style identifiers.

/// Splits `name(args)` into `("name", Some("args"))`; a bare `name` gives
/// `None`. The name is lower-cased and trimmed.
pub(crate) fn split_call(s: &str) -> Result<(String, Option<String>), String> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s.to_ascii_lowercase(), None)),
        Some(open) => {
            if !s.ends_with(')') {
                return Err(format!("unbalanced parentheses in '{s}'"));
            }
            let name = s[..open].trim().to_ascii_lowercase();
            Ok((name, Some(s[open + 1..s.len() - 1].trim().to_string())))
        }
    }
}

pub(crate) fn list<T: std::str::FromStr>(s: &str, sep: char) -> Result<Vec<T>, String> {
    s.split(sep)
        .map(|v| {
            let v = v.trim();
            v.parse::<T>().map_err(|_| format!("cannot parse '{v}'"))
        })
        .collect()
}

pub(crate) fn one<T: std::str::FromStr>(name: &str, args: Option<&str>) -> Result<T, String> {
    let args = args.ok_or_else(|| format!("{name} needs an argument"))?;
    let v: Vec<T> = list(args, ',')?;
    match <[T; 1]>::try_from(v) {
        Ok([x]) => Ok(x),
        Err(_) => Err(format!("{name} takes exactly one argument")),
    }
}

pub(crate) fn two<T: std::str::FromStr>(name: &str, args: Option<&str>) -> Result<(T, T), String> {
    let args = args.ok_or_else(|| format!("{name} needs two arguments"))?;
    let v: Vec<T> = list(args, ',')?;
    match <[T; 2]>::try_from(v) {
        Ok([a, b]) => Ok((a, b)),
        Err(_) => Err(format!("{name} takes exactly two arguments")),
    }
}

pub(crate) fn no_args(name: &str, args: Option<&str>) -> Result<(), String> {
    match args {
        None | Some("") => Ok(()),
        Some(_) => Err(format!("{name} takes no arguments")),
    }
}
