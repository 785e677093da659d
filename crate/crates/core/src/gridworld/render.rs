use super::{ObjectKind, WorldState};

fn glyph(object: ObjectKind) -> char {
    match object {
        ObjectKind::Empty => '.',
        ObjectKind::Wall => '#',
        ObjectKind::Door => 'D',
        ObjectKind::Key => 'K',
        ObjectKind::Box => 'B',
        ObjectKind::Obstacle => 'O',
    }
}

/// One line per row. Unexplored cells are lowercase; walls and floor have no
/// case, so they render as `+` and `,` when unexplored.
pub fn render_ascii(state: &WorldState) -> String {
    let mut out = String::with_capacity((state.width + 1) * state.height);
    for y in 0..state.height {
        for x in 0..state.width {
            let ch = if (x, y) == state.agent_pos {
                state.agent_dir.glyph()
            } else {
                let g = glyph(state.cell(x, y).object);
                if state.is_explored(x, y) {
                    g
                } else {
                    match g {
                        '#' => '+',
                        '.' => ',',
                        other => other.to_ascii_lowercase(),
                    }
                }
            };
            out.push(ch);
        }
        out.push('\n');
    }
    out
}
