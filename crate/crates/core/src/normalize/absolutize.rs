use super::RejectReason;
use crate::geom::Point;
use crate::parse::RawCommand;

/// Rewrites relative commands against the running current point. `H`/`V`
/// become `L`; every other letter is kept in its uppercase form.
pub fn absolutize(commands: &[RawCommand]) -> Result<Vec<RawCommand>, RejectReason> {
    match commands.first() {
        None => return Ok(Vec::new()),
        Some(c) if c.letter.eq_ignore_ascii_case(&'M') => {}
        Some(c) => return Err(RejectReason::non_renderable(format!("path starts with '{}' instead of M", c.letter))),
    }

    let mut out = Vec::with_capacity(commands.len());
    let mut pen = Point::ORIGIN;
    let mut start = Point::ORIGIN;
    for cmd in commands {
        let rel = cmd.is_relative();
        let (ox, oy) = if rel { (pen.x, pen.y) } else { (0.0, 0.0) };
        let a = &cmd.args;
        let abs = match cmd.letter.to_ascii_uppercase() {
            'M' => {
                let p = Point::new(a[0] + ox, a[1] + oy);
                start = p;
                RawCommand::new('M', vec![p.x, p.y])
            }
            'L' | 'T' => RawCommand::new(cmd.letter.to_ascii_uppercase(), vec![a[0] + ox, a[1] + oy]),
            'H' => RawCommand::new('L', vec![a[0] + ox, pen.y]),
            'V' => RawCommand::new('L', vec![pen.x, a[0] + oy]),
            'C' => RawCommand::new('C', vec![a[0] + ox, a[1] + oy, a[2] + ox, a[3] + oy, a[4] + ox, a[5] + oy]),
            'S' | 'Q' => {
                RawCommand::new(cmd.letter.to_ascii_uppercase(), vec![a[0] + ox, a[1] + oy, a[2] + ox, a[3] + oy])
            }
            'A' => RawCommand::new('A', vec![a[0], a[1], a[2], a[3], a[4], a[5] + ox, a[6] + oy]),
            'Z' => RawCommand::new('Z', vec![]),
            other => unreachable!("parser produced unknown command {other}"),
        };
        pen = match abs.letter {
            'Z' => start,
            _ => {
                let n = abs.args.len();
                Point::new(abs.args[n - 2], abs.args[n - 1])
            }
        };
        out.push(abs);
    }
    Ok(out)
}
