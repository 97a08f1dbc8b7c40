//! Tables shipped with the crate (regenerate via `snseg critval`).

use super::TableKind;

pub(super) fn table_text(kind: TableKind) -> Option<&'static str> {
    match kind {
        TableKind::Sncp { dim: 1 } => Some(include_str!("../../tables/sncp_d1.txt")),
        TableKind::Sncp { dim: 2 } => Some(include_str!("../../tables/sncp_d2.txt")),
        TableKind::Sncp { dim: 3 } => Some(include_str!("../../tables/sncp_d3.txt")),
        TableKind::Sncp { dim: 4 } => Some(include_str!("../../tables/sncp_d4.txt")),
        TableKind::Sncp { dim: 5 } => Some(include_str!("../../tables/sncp_d5.txt")),
        TableKind::Sncp { dim: 6 } => Some(include_str!("../../tables/sncp_d6.txt")),
        TableKind::Sncp { dim: 7 } => Some(include_str!("../../tables/sncp_d7.txt")),
        TableKind::Sncp { dim: 8 } => Some(include_str!("../../tables/sncp_d8.txt")),
        TableKind::Sncp { dim: 9 } => Some(include_str!("../../tables/sncp_d9.txt")),
        TableKind::Sncp { dim: 10 } => Some(include_str!("../../tables/sncp_d10.txt")),
        TableKind::Snhd => Some(include_str!("../../tables/snhd.txt")),
        TableKind::Sncp { .. } => None,
    }
}
