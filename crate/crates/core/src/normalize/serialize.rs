use super::{CanonicalDocument, PathCommand};
use crate::parse::push_number;

pub const CANONICAL_HEADER: &str = r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200">"#;
pub const CANONICAL_FOOTER: &str = "</svg>";

pub fn serialize_canonical(doc: &CanonicalDocument) -> String {
    let mut out = String::from(CANONICAL_HEADER);
    for path in &doc.paths {
        out.push_str("<path fill=\"");
        out.push_str(&path.fill.to_hex());
        out.push_str("\" d=\"");
        for (i, cmd) in path.commands.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push(cmd.letter());
            let nums: Vec<f64> = match *cmd {
                PathCommand::Move(p) | PathCommand::Line(p) => vec![p.x, p.y],
                PathCommand::Cubic(c1, c2, p) => vec![c1.x, c1.y, c2.x, c2.y, p.x, p.y],
                PathCommand::Arc(a) => {
                    vec![a.rx, a.ry, a.phi, a.large_arc as u8 as f64, a.sweep as u8 as f64, a.to.x, a.to.y]
                }
                PathCommand::Close => vec![],
            };
            for (j, v) in nums.into_iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                push_number(&mut out, v);
            }
        }
        out.push_str("\" />");
    }
    out.push_str(CANONICAL_FOOTER);
    out
}
