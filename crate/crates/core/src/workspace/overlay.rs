//! Numeric overlays: every actionable on-screen element gets a number the
//! user can say.
//!
//! Reading order is fixed UI controls, then sprites in creation order, then
//! the open palette category in catalog order, then the selected sprite's
//! blocks by stack position (y, then x) and depth-first within a stack.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{BlockId, SpriteId, Workspace, WorkspaceError};
use crate::config::{Category, OverlayMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "control", content = "category")]
pub enum UiControl {
    GreenFlag,
    Stop,
    AddSprite,
    Category(Category),
    OverlayMode,
    TalkMode,
}

impl UiControl {
    pub const ALL: [UiControl; 10] = [
        UiControl::GreenFlag,
        UiControl::Stop,
        UiControl::AddSprite,
        UiControl::Category(Category::Motion),
        UiControl::Category(Category::Looks),
        UiControl::Category(Category::Events),
        UiControl::Category(Category::Control),
        UiControl::Category(Category::Variables),
        UiControl::OverlayMode,
        UiControl::TalkMode,
    ];

    /// Text shown on the control, if it has any. Icon buttons have none.
    pub fn caption(self) -> Option<&'static str> {
        match self {
            UiControl::Category(c) => Some(c.name()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "ref")]
pub enum ElementRef {
    Control(UiControl),
    Sprite(SpriteId),
    Palette(String),
    Block(BlockId),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub element: ElementRef,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlayMap {
    pub mode: OverlayMode,
    pub generation: u64,
    pub entries: BTreeMap<u32, ElementRef>,
    /// Text labels attached to readable elements (smart and combined modes).
    pub labels: Vec<Label>,
}

impl OverlayMap {
    /// Looks up a spoken number. Numbers from an older display are refused.
    pub fn resolve(&self, number: u32, current_generation: u64) -> Result<&ElementRef, WorkspaceError> {
        if self.generation != current_generation {
            return Err(WorkspaceError::StaleOverlay { number });
        }
        self.entries.get(&number).ok_or(WorkspaceError::UnknownOverlayNumber(number))
    }

    pub fn number_of(&self, element: &ElementRef) -> Option<u32> {
        self.entries.iter().find(|(_, e)| *e == element).map(|(n, _)| *n)
    }

    pub fn label_of(&self, element: &ElementRef) -> Option<&str> {
        self.labels.iter().find(|l| l.element == *element).map(|l| l.text.as_str())
    }
}

/// All actionable elements in reading order.
pub fn elements(ws: &Workspace) -> Vec<ElementRef> {
    let mut out: Vec<ElementRef> = UiControl::ALL.iter().copied().map(ElementRef::Control).collect();
    out.extend(ws.project().sprites.iter().map(|s| ElementRef::Sprite(s.id)));
    if let Some(category) = ws.view().palette {
        out.extend(ws.catalog().in_category(category).map(|b| ElementRef::Palette(b.opcode.clone())));
    }
    let sprite = ws.sprite();
    let mut stacks: Vec<(usize, BlockId)> = sprite.stacks.iter().copied().enumerate().collect();
    stacks.sort_by_key(|(i, top)| {
        let pos = sprite.blocks[top].position.unwrap_or_default();
        (pos.y, pos.x, *i)
    });
    for (_, top) in stacks {
        out.extend(sprite.depth_first(top).into_iter().map(ElementRef::Block));
    }
    out
}

/// Numbers the elements for `mode`. `text` supplies the readable label of an
/// element, `None` marking elements without one (icons).
pub fn assign_overlays(ws: &Workspace, mode: OverlayMode, text: impl Fn(&ElementRef) -> Option<String>) -> OverlayMap {
    let mut entries = BTreeMap::new();
    let mut labels = Vec::new();
    let mut next = 1;
    for element in elements(ws) {
        let label = text(&element);
        let numbered = match mode {
            OverlayMode::Numerical | OverlayMode::Combined => true,
            OverlayMode::Smart => label.is_none(),
        };
        if mode != OverlayMode::Numerical {
            if let Some(t) = label {
                labels.push(Label { element: element.clone(), text: t });
            }
        }
        if numbered {
            entries.insert(next, element);
            next += 1;
        }
    }
    OverlayMap { mode, generation: ws.generation(), entries, labels }
}

/// Labels from names alone: control captions, sprite names, and opcodes for
/// palette items and blocks.
pub fn plain_labels(ws: &Workspace) -> impl Fn(&ElementRef) -> Option<String> + '_ {
    move |e| match e {
        ElementRef::Control(c) => c.caption().map(String::from),
        ElementRef::Sprite(id) => ws.project().sprite(*id).map(|s| s.name.clone()),
        ElementRef::Palette(op) => Some(op.clone()),
        ElementRef::Block(id) => ws.block(*id).map(|b| b.opcode.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::grammar::BlockInstantiation;
    use crate::workspace::Position;
    use alloc::sync::Arc;

    fn ws() -> Workspace {
        Workspace::new(Arc::new(Config::bundled().catalog), 100)
    }

    fn mv() -> BlockInstantiation {
        BlockInstantiation::with_defaults(Config::bundled().catalog.get("motion_movesteps").unwrap())
    }

    #[test]
    fn empty_workspace_numbers_controls_sprites_and_palette() {
        let mut w = ws();
        let map = assign_overlays(&w, OverlayMode::Numerical, plain_labels(&w));
        assert_eq!(map.entries.len(), UiControl::ALL.len() + 1);
        assert!(map.labels.is_empty());
        w.open_palette(Some(Category::Motion));
        let map = assign_overlays(&w, OverlayMode::Numerical, plain_labels(&w));
        let motion = w.catalog().in_category(Category::Motion).count();
        assert_eq!(map.entries.len(), UiControl::ALL.len() + 1 + motion);
        assert_eq!(map.entries[&12], ElementRef::Palette("motion_movesteps".into()));
    }

    #[test]
    fn lower_stacks_come_first() {
        let mut w = ws();
        let low = w.place_block_at(&mv(), Position { x: 0, y: 40 }).unwrap();
        let high = w.place_block_at(&mv(), Position { x: 0, y: 10 }).unwrap();
        let map = assign_overlays(&w, OverlayMode::Numerical, plain_labels(&w));
        assert!(map.number_of(&ElementRef::Block(high)) < map.number_of(&ElementRef::Block(low)));
        assert_eq!(map, assign_overlays(&w, OverlayMode::Numerical, plain_labels(&w)));
    }

    #[test]
    fn smart_mode_numbers_only_unlabeled_elements() {
        let mut w = ws();
        w.place_block(&mv()).unwrap();
        let map = assign_overlays(&w, OverlayMode::Smart, plain_labels(&w));
        let icons = UiControl::ALL.iter().filter(|c| c.caption().is_none()).count();
        assert_eq!(map.entries.len(), icons);
        assert_eq!(map.labels.len(), UiControl::ALL.len() - icons + 2);
        let combined = assign_overlays(&w, OverlayMode::Combined, plain_labels(&w));
        assert_eq!(combined.entries.len(), UiControl::ALL.len() + 2);
        assert_eq!(combined.labels.len(), map.labels.len());
    }

    #[test]
    fn stale_and_unknown_numbers() {
        let mut w = ws();
        let map = assign_overlays(&w, OverlayMode::Combined, plain_labels(&w));
        assert_eq!(map.resolve(1, w.generation()), Ok(&ElementRef::Control(UiControl::GreenFlag)));
        assert_eq!(map.resolve(999, w.generation()), Err(WorkspaceError::UnknownOverlayNumber(999)));
        w.place_block(&mv()).unwrap();
        assert_eq!(map.resolve(1, w.generation()), Err(WorkspaceError::StaleOverlay { number: 1 }));
    }
}
