//! The authoritative editor state.
//!
//! Sprites own flat maps of blocks linked by `next`/`parent` and by block
//! inputs. Every mutation goes through [`Workspace`], which applies it to a
//! copy and only commits on success, pushing the previous state onto a
//! bounded undo stack.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{BlockCatalog, BlockSpec, Category, OverlayMode, Shape};
use crate::grammar::BlockInstantiation;
use crate::value::Value;

pub mod overlay;
pub mod project;
pub mod validate;

pub use overlay::{assign_overlays, ElementRef, OverlayMap, UiControl};
pub use project::{ProjectFile, PROJECT_SCHEMA};

/// Input name holding the first block of a C-block's body.
pub const SUBSTACK: &str = "SUBSTACK";
/// Vertical spacing of the placement grid.
pub const GRID: i32 = 40;
pub const DEFAULT_VARIABLE: &str = "my variable";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u32);

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpriteId(pub u32);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Position {
    pub x: i32,
    pub y: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Input {
    Literal(Value),
    Block(BlockId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub id: BlockId,
    pub opcode: String,
    pub inputs: BTreeMap<String, Input>,
    pub next: Option<BlockId>,
    pub parent: Option<BlockId>,
    /// Set exactly for top-level blocks.
    pub position: Option<Position>,
}

impl Block {
    pub fn literal(&self, slot: &str) -> Option<&Value> {
        match self.inputs.get(slot) {
            Some(Input::Literal(v)) => Some(v),
            _ => None,
        }
    }

    pub fn substack(&self) -> Option<BlockId> {
        match self.inputs.get(SUBSTACK) {
            Some(Input::Block(id)) => Some(*id),
            _ => None,
        }
    }

    fn input_slot_of(&self, child: BlockId) -> Option<String> {
        self.inputs
            .iter()
            .find(|(_, i)| matches!(i, Input::Block(b) if *b == child))
            .map(|(k, _)| k.clone())
    }

    fn child_blocks(&self) -> impl Iterator<Item = BlockId> + '_ {
        self.inputs.values().filter_map(|i| match i {
            Input::Block(b) => Some(*b),
            Input::Literal(_) => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sprite {
    pub id: SpriteId,
    pub name: String,
    pub blocks: BTreeMap<BlockId, Block>,
    /// Top-level blocks in creation order.
    pub stacks: Vec<BlockId>,
    pub variables: BTreeMap<String, Value>,
}

impl Sprite {
    fn new(id: SpriteId, name: String) -> Self {
        Sprite { id, name, blocks: BTreeMap::new(), stacks: Vec::new(), variables: BTreeMap::new() }
    }

    pub fn block(&self, id: BlockId) -> Option<&Block> {
        self.blocks.get(&id)
    }

    /// A block and every block reachable through its inputs and `next` links.
    pub fn chain_below(&self, id: BlockId) -> Vec<BlockId> {
        let mut out = Vec::new();
        let mut todo = alloc::vec![id];
        while let Some(b) = todo.pop() {
            let Some(block) = self.blocks.get(&b) else { continue };
            out.push(b);
            todo.extend(block.next);
            todo.extend(block.child_blocks());
        }
        out
    }

    /// Blocks of one stack in display order: each block, then its body, then
    /// the block below it.
    pub fn depth_first(&self, top: BlockId) -> Vec<BlockId> {
        let mut out = Vec::new();
        let mut todo = alloc::vec![top];
        while let Some(b) = todo.pop() {
            let Some(block) = self.blocks.get(&b) else { continue };
            out.push(b);
            todo.extend(block.next);
            let mut children: Vec<BlockId> = block.child_blocks().collect();
            children.reverse();
            todo.extend(children);
        }
        out
    }

    /// Last block of the `next` chain starting at `id`.
    pub fn tail(&self, id: BlockId) -> BlockId {
        let mut cur = id;
        while let Some(n) = self.blocks.get(&cur).and_then(|b| b.next) {
            cur = n;
        }
        cur
    }

    /// Whether `ancestor` is `id` or above it through parent links.
    pub fn is_ancestor(&self, ancestor: BlockId, id: BlockId) -> bool {
        let mut cur = Some(id);
        let mut steps = 0;
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            steps += 1;
            if steps > self.blocks.len() {
                return false;
            }
            cur = self.blocks.get(&c).and_then(|b| b.parent);
        }
        false
    }

    pub fn top_of(&self, id: BlockId) -> BlockId {
        let mut cur = id;
        while let Some(p) = self.blocks.get(&cur).and_then(|b| b.parent) {
            cur = p;
        }
        cur
    }

    fn free_position(&self) -> Position {
        let occupied: Vec<(i32, i32)> = self
            .stacks
            .iter()
            .filter_map(|top| {
                let pos = self.blocks.get(top)?.position?;
                let rows = self.chain_below(*top).len() as i32;
                Some((pos.y, pos.y + rows * GRID))
            })
            .collect();
        let mut y = 0;
        while occupied.iter().any(|(lo, hi)| y >= *lo && y < *hi) {
            y += GRID;
        }
        Position { x: 0, y }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableScope {
    /// Visible to every sprite, stored on the stage.
    Global,
    Sprite,
}

/// Everything that is saved in a project file.
#[derive(Clone, Debug, PartialEq)]
pub struct Project {
    pub sprites: Vec<Sprite>,
    pub stage_variables: BTreeMap<String, Value>,
    pub next_block: u32,
    pub next_sprite: u32,
}

impl Project {
    pub fn new() -> Self {
        let mut stage_variables = BTreeMap::new();
        stage_variables.insert(DEFAULT_VARIABLE.to_string(), Value::Number(0.0));
        Project {
            sprites: alloc::vec![Sprite::new(SpriteId(1), "Sprite1".into())],
            stage_variables,
            next_block: 1,
            next_sprite: 2,
        }
    }

    pub fn sprite(&self, id: SpriteId) -> Option<&Sprite> {
        self.sprites.iter().find(|s| s.id == id)
    }

    fn sprite_mut(&mut self, id: SpriteId) -> Option<&mut Sprite> {
        self.sprites.iter_mut().find(|s| s.id == id)
    }

    pub fn sprite_named(&self, name: &str) -> Option<&Sprite> {
        self.sprites.iter().find(|s| s.name.eq_ignore_ascii_case(name))
    }

    pub fn block_count(&self) -> usize {
        self.sprites.iter().map(|s| s.blocks.len()).sum()
    }
}

impl Default for Project {
    fn default() -> Self {
        Project::new()
    }
}

/// Selection and display state. Restored by undo together with the project
/// but never itself recorded as an undo step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct View {
    pub selected_sprite: SpriteId,
    pub focused_block: Option<BlockId>,
    pub palette: Option<Category>,
    pub overlay_mode: OverlayMode,
}

#[derive(Clone, Debug, PartialEq)]
struct Snapshot {
    project: Project,
    view: View,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum WorkspaceError {
    #[error("unknown block {0}")]
    UnknownBlock(BlockId),
    #[error("unknown sprite '{0}'")]
    UnknownSprite(String),
    #[error("unknown block type '{0}'")]
    UnknownOpcode(String),
    #[error("block '{opcode}' has no input '{slot}'")]
    UnknownSlot { opcode: String, slot: String },
    #[error("input '{slot}' cannot hold {value:?}")]
    TypeMismatch { slot: String, value: Value },
    #[error("illegal connection: {0}")]
    IllegalConnection(String),
    #[error("connecting {lower} below {upper} would create a cycle")]
    Cycle { upper: BlockId, lower: BlockId },
    #[error("a sprite named '{0}' already exists")]
    DuplicateSprite(String),
    #[error("variable '{0}' already exists")]
    DuplicateVariable(String),
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("invalid name '{0}'")]
    InvalidName(String),
    #[error("no block is focused")]
    NoFocus,
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("nothing to redo")]
    NothingToRedo,
    #[error("no element has overlay number {0}")]
    UnknownOverlayNumber(u32),
    #[error("overlay number {number} is from an outdated display")]
    StaleOverlay { number: u32 },
    #[error("invalid project: {0}")]
    InvalidProject(String),
}

pub type Result<T> = core::result::Result<T, WorkspaceError>;

/// Editor state plus undo history.
#[derive(Clone, Debug)]
pub struct Workspace {
    catalog: Arc<BlockCatalog>,
    project: Project,
    view: View,
    undo: VecDeque<Snapshot>,
    redo: Vec<Snapshot>,
    undo_depth: usize,
    generation: u64,
    revision: u64,
}

impl Workspace {
    pub fn new(catalog: Arc<BlockCatalog>, undo_depth: usize) -> Self {
        Workspace::with_project(catalog, undo_depth, Project::new())
    }

    /// Starts from a loaded project. The project is assumed valid, see
    /// [`project::ProjectFile::into_project`].
    pub fn with_project(catalog: Arc<BlockCatalog>, undo_depth: usize, project: Project) -> Self {
        let view = View {
            selected_sprite: project.sprites[0].id,
            focused_block: None,
            palette: None,
            overlay_mode: OverlayMode::default(),
        };
        Workspace { catalog, project, view, undo: VecDeque::new(), redo: Vec::new(), undo_depth, generation: 0, revision: 0 }
    }

    pub fn catalog(&self) -> &BlockCatalog {
        &self.catalog
    }

    pub fn project(&self) -> &Project {
        &self.project
    }

    pub fn view(&self) -> &View {
        &self.view
    }

    /// Increases whenever anything shown on screen may have changed.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Increases with every change to the project (mutations, undo, redo);
    /// view changes leave it alone.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn undo_len(&self) -> usize {
        self.undo.len()
    }

    pub fn redo_len(&self) -> usize {
        self.redo.len()
    }

    pub fn sprite(&self) -> &Sprite {
        self.project.sprite(self.view.selected_sprite).expect("selected sprite exists")
    }

    pub fn block(&self, id: BlockId) -> Option<&Block> {
        self.sprite().block(id)
    }

    pub fn spec(&self, opcode: &str) -> Option<&BlockSpec> {
        self.catalog.get(opcode)
    }

    pub fn shape_of(&self, id: BlockId) -> Option<Shape> {
        self.block(id).and_then(|b| self.catalog.get(&b.opcode)).map(|s| s.shape)
    }

    pub fn variable(&self, name: &str) -> Option<&Value> {
        self.sprite().variables.get(name).or_else(|| self.project.stage_variables.get(name))
    }

    pub fn to_project_file(&self) -> ProjectFile {
        ProjectFile::from_project(&self.project)
    }

    /// Canonical JSON of the project, the basis of byte-identity checks.
    pub fn serialize(&self) -> String {
        self.to_project_file().to_json()
    }

    /// Graph consistency plus selection and focus validity.
    pub fn check(&self) -> core::result::Result<(), validate::Violation> {
        validate::validate(&self.project, &self.catalog)?;
        let fail = |problem: &str| validate::Violation { sprite: String::new(), problem: problem.into() };
        let sprite = self.project.sprite(self.view.selected_sprite).ok_or_else(|| fail("selected sprite missing"))?;
        if self.view.focused_block.is_some_and(|f| !sprite.blocks.contains_key(&f)) {
            return Err(fail("focused block outside the selected sprite"));
        }
        Ok(())
    }

    fn touch(&mut self) {
        self.generation += 1;
    }

    /// Runs `f` on a copy of the state and commits it as one undo step.
    fn mutate<T>(&mut self, f: impl FnOnce(&mut Project, &mut View, &BlockCatalog) -> Result<T>) -> Result<T> {
        let mut project = self.project.clone();
        let mut view = self.view.clone();
        let out = f(&mut project, &mut view, &self.catalog)?;
        let before = Snapshot {
            project: core::mem::replace(&mut self.project, project),
            view: core::mem::replace(&mut self.view, view),
        };
        self.undo.push_back(before);
        while self.undo.len() > self.undo_depth {
            self.undo.pop_front();
        }
        self.redo.clear();
        self.revision += 1;
        self.touch();
        Ok(out)
    }

    /// Creates a block from an instantiation. With a focused block the new
    /// block is attached there: into an empty C-block body, above a stack top
    /// for hat blocks, otherwise directly below. Without focus it starts a new
    /// stack. Focus moves to the new block.
    pub fn place_block(&mut self, inst: &BlockInstantiation) -> Result<BlockId> {
        self.place(inst, None)
    }

    /// Places a block as a new stack at a given position, ignoring focus.
    pub fn place_block_at(&mut self, inst: &BlockInstantiation, at: Position) -> Result<BlockId> {
        self.place(inst, Some(at))
    }

    fn place(&mut self, inst: &BlockInstantiation, at: Option<Position>) -> Result<BlockId> {
        let spec = self.catalog.get(&inst.opcode).ok_or_else(|| WorkspaceError::UnknownOpcode(inst.opcode.clone()))?;
        let inputs = literal_inputs(spec, inst)?;
        let shape = spec.shape;
        let sprite_id = self.view.selected_sprite;
        let focus = if at.is_some() { None } else { self.view.focused_block };
        self.mutate(|project, view, catalog| {
            let id = BlockId(project.next_block);
            project.next_block += 1;
            let sprite = project.sprite_mut(sprite_id).expect("selected sprite exists");
            let block = Block { id, opcode: inst.opcode.clone(), inputs, next: None, parent: None, position: None };
            sprite.blocks.insert(id, block);
            match focus {
                None => make_top_level(sprite, id, at),
                Some(f) => attach_to_focus(sprite, catalog, f, id, shape)?,
            }
            view.focused_block = Some(id);
            Ok(id)
        })
    }

    /// Puts `lower` (with the blocks below it) directly under `upper`. Whatever
    /// was under `upper` moves to the bottom of the inserted chain.
    pub fn connect(&mut self, upper: BlockId, lower: BlockId) -> Result<()> {
        let sprite_id = self.view.selected_sprite;
        self.mutate(|project, _, catalog| {
            let sprite = project.sprite_mut(sprite_id).expect("selected sprite exists");
            let upper_shape = shape(sprite, catalog, upper)?;
            let lower_shape = shape(sprite, catalog, lower)?;
            if sprite.is_ancestor(lower, upper) {
                return Err(WorkspaceError::Cycle { upper, lower });
            }
            if !upper_shape.has_next() {
                return Err(illegal(format!("nothing can go below {}", shape_name(upper_shape))));
            }
            if !lower_shape.has_previous() {
                return Err(illegal(format!("{} cannot go below another block", shape_name(lower_shape))));
            }
            detach(sprite, lower);
            let displaced = sprite.blocks.get_mut(&upper).expect("checked").next.replace(lower);
            sprite.blocks.get_mut(&lower).expect("checked").parent = Some(upper);
            if let Some(d) = displaced {
                reattach_displaced(sprite, catalog, lower, d);
            }
            Ok(())
        })
    }

    /// Puts `child` (with the blocks below it) at the start of a C-block's body.
    pub fn nest(&mut self, container: BlockId, child: BlockId) -> Result<()> {
        let sprite_id = self.view.selected_sprite;
        self.mutate(|project, _, catalog| {
            let sprite = project.sprite_mut(sprite_id).expect("selected sprite exists");
            let outer = shape(sprite, catalog, container)?;
            let inner = shape(sprite, catalog, child)?;
            if sprite.is_ancestor(child, container) {
                return Err(WorkspaceError::Cycle { upper: container, lower: child });
            }
            if !outer.has_substack() {
                return Err(illegal(format!("{} has no body", shape_name(outer))));
            }
            if !inner.has_previous() {
                return Err(illegal(format!("{} cannot go inside a C-block", shape_name(inner))));
            }
            detach(sprite, child);
            let displaced = match sprite.blocks.get_mut(&container).expect("checked").inputs.insert(SUBSTACK.into(), Input::Block(child)) {
                Some(Input::Block(b)) => Some(b),
                _ => None,
            };
            sprite.blocks.get_mut(&child).expect("checked").parent = Some(container);
            if let Some(d) = displaced {
                reattach_displaced(sprite, catalog, child, d);
            }
            Ok(())
        })
    }

    /// Removes a block with everything in its inputs; the blocks below it
    /// close the gap.
    pub fn delete_block(&mut self, id: BlockId) -> Result<usize> {
        let sprite_id = self.view.selected_sprite;
        self.mutate(|project, view, _| {
            let sprite = project.sprite_mut(sprite_id).expect("selected sprite exists");
            let block = sprite.blocks.get(&id).ok_or(WorkspaceError::UnknownBlock(id))?.clone();
            let mut doomed: Vec<BlockId> = block.child_blocks().flat_map(|c| sprite.chain_below(c)).collect();
            doomed.push(id);
            match (block.parent, block.next) {
                (Some(p), next) => {
                    let parent = sprite.blocks.get_mut(&p).expect("linked");
                    if parent.next == Some(id) {
                        parent.next = next;
                    } else if let Some(slot) = parent.input_slot_of(id) {
                        match next {
                            Some(n) => parent.inputs.insert(slot, Input::Block(n)),
                            None => parent.inputs.remove(&slot),
                        };
                    }
                    if let Some(n) = next {
                        sprite.blocks.get_mut(&n).expect("linked").parent = Some(p);
                    }
                }
                (None, Some(n)) => {
                    let index = sprite.stacks.iter().position(|s| *s == id).expect("top-level listed");
                    sprite.stacks[index] = n;
                    let below = sprite.blocks.get_mut(&n).expect("linked");
                    below.parent = None;
                    below.position = block.position;
                }
                (None, None) => sprite.stacks.retain(|s| *s != id),
            }
            for d in &doomed {
                sprite.blocks.remove(d);
            }
            if view.focused_block.is_some_and(|f| !sprite.blocks.contains_key(&f)) {
                view.focused_block = block.next.or(block.parent);
            }
            Ok(doomed.len())
        })
    }

    pub fn set_input(&mut self, id: BlockId, slot: &str, value: Value) -> Result<()> {
        let block = self.block(id).ok_or(WorkspaceError::UnknownBlock(id))?;
        let spec = self.catalog.get(&block.opcode).expect("known opcode");
        let slot_spec = spec
            .slot(slot)
            .ok_or_else(|| WorkspaceError::UnknownSlot { opcode: spec.opcode.clone(), slot: slot.to_string() })?;
        if !slot_spec.accepts(&value) {
            return Err(WorkspaceError::TypeMismatch { slot: slot.to_string(), value });
        }
        let sprite_id = self.view.selected_sprite;
        self.mutate(|project, _, _| {
            let sprite = project.sprite_mut(sprite_id).expect("selected sprite exists");
            sprite.blocks.get_mut(&id).expect("checked").inputs.insert(slot.to_string(), Input::Literal(value));
            Ok(())
        })
    }

    /// Adds a sprite and selects it. Without a name the next free
    /// `SpriteN` is used.
    pub fn add_sprite(&mut self, name: Option<&str>) -> Result<SpriteId> {
        let name = match name {
            Some(n) => checked_name(n)?,
            None => {
                let mut n = self.project.sprites.len() + 1;
                while self.project.sprite_named(&format!("Sprite{n}")).is_some() {
                    n += 1;
                }
                format!("Sprite{n}")
            }
        };
        if self.project.sprite_named(&name).is_some() {
            return Err(WorkspaceError::DuplicateSprite(name));
        }
        self.mutate(|project, view, _| {
            let id = SpriteId(project.next_sprite);
            project.next_sprite += 1;
            project.sprites.push(Sprite::new(id, name));
            view.selected_sprite = id;
            view.focused_block = None;
            Ok(id)
        })
    }

    pub fn select_sprite(&mut self, id: SpriteId) -> Result<()> {
        if self.project.sprite(id).is_none() {
            return Err(WorkspaceError::UnknownSprite(format!("{}", id.0)));
        }
        if self.view.selected_sprite != id {
            self.view.selected_sprite = id;
            self.view.focused_block = None;
            self.touch();
        }
        Ok(())
    }

    pub fn select_sprite_named(&mut self, name: &str) -> Result<SpriteId> {
        let id = self.project.sprite_named(name).ok_or_else(|| WorkspaceError::UnknownSprite(name.to_string()))?.id;
        self.select_sprite(id)?;
        Ok(id)
    }

    pub fn focus(&mut self, id: Option<BlockId>) -> Result<()> {
        if let Some(b) = id {
            self.block(b).ok_or(WorkspaceError::UnknownBlock(b))?;
        }
        if self.view.focused_block != id {
            self.view.focused_block = id;
            self.touch();
        }
        Ok(())
    }

    pub fn open_palette(&mut self, category: Option<Category>) {
        if self.view.palette != category {
            self.view.palette = category;
            self.touch();
        }
    }

    pub fn set_overlay_mode(&mut self, mode: OverlayMode) {
        if self.view.overlay_mode != mode {
            self.view.overlay_mode = mode;
            self.touch();
        }
    }

    pub fn create_variable(&mut self, name: &str, scope: VariableScope) -> Result<()> {
        let name = checked_name(name)?;
        let taken = self.project.stage_variables.contains_key(&name)
            || self.project.sprites.iter().any(|s| s.variables.contains_key(&name));
        if taken {
            return Err(WorkspaceError::DuplicateVariable(name));
        }
        let sprite_id = self.view.selected_sprite;
        self.mutate(|project, _, _| {
            let vars = match scope {
                VariableScope::Global => &mut project.stage_variables,
                VariableScope::Sprite => &mut project.sprite_mut(sprite_id).expect("selected").variables,
            };
            vars.insert(name, Value::Number(0.0));
            Ok(())
        })
    }

    /// Sets a sprite-local variable, or the global one of that name.
    pub fn set_variable(&mut self, name: &str, value: Value) -> Result<()> {
        if let Value::Number(n) = value {
            if !n.is_finite() {
                return Err(WorkspaceError::TypeMismatch { slot: name.to_string(), value });
            }
        }
        let sprite_id = self.view.selected_sprite;
        let local = self.sprite().variables.contains_key(name);
        if !local && !self.project.stage_variables.contains_key(name) {
            return Err(WorkspaceError::UnknownVariable(name.to_string()));
        }
        self.mutate(|project, _, _| {
            let vars = if local {
                &mut project.sprite_mut(sprite_id).expect("selected").variables
            } else {
                &mut project.stage_variables
            };
            vars.insert(name.to_string(), value);
            Ok(())
        })
    }

    pub fn undo(&mut self) -> Result<()> {
        let prev = self.undo.pop_back().ok_or(WorkspaceError::NothingToUndo)?;
        let current = Snapshot {
            project: core::mem::replace(&mut self.project, prev.project),
            view: core::mem::replace(&mut self.view, prev.view),
        };
        self.redo.push(current);
        self.revision += 1;
        self.touch();
        Ok(())
    }

    pub fn redo(&mut self) -> Result<()> {
        let next = self.redo.pop().ok_or(WorkspaceError::NothingToRedo)?;
        let current = Snapshot {
            project: core::mem::replace(&mut self.project, next.project),
            view: core::mem::replace(&mut self.view, next.view),
        };
        self.undo.push_back(current);
        self.revision += 1;
        self.touch();
        Ok(())
    }
}

fn illegal(msg: String) -> WorkspaceError {
    WorkspaceError::IllegalConnection(msg)
}

fn shape_name(shape: Shape) -> &'static str {
    match shape {
        Shape::Hat => "a hat block",
        Shape::Stack => "a stack block",
        Shape::Cap => "a cap block",
        Shape::CBlock => "a C-block",
        Shape::CapCBlock => "a capped C-block",
        Shape::Reporter => "a reporter",
    }
}

fn shape(sprite: &Sprite, catalog: &BlockCatalog, id: BlockId) -> Result<Shape> {
    let block = sprite.blocks.get(&id).ok_or(WorkspaceError::UnknownBlock(id))?;
    Ok(catalog.get(&block.opcode).expect("known opcode").shape)
}

fn checked_name(name: &str) -> Result<String> {
    let trimmed = name.split_whitespace().collect::<Vec<_>>().join(" ");
    if trimmed.is_empty() {
        return Err(WorkspaceError::InvalidName(name.to_string()));
    }
    Ok(trimmed)
}

fn literal_inputs(spec: &BlockSpec, inst: &BlockInstantiation) -> Result<BTreeMap<String, Input>> {
    if let Some(extra) = inst.slot_values.keys().find(|k| spec.slot(k).is_none()) {
        return Err(WorkspaceError::UnknownSlot { opcode: spec.opcode.clone(), slot: extra.clone() });
    }
    let mut inputs = BTreeMap::new();
    for slot in &spec.slots {
        let value = match inst.slot_values.get(&slot.name) {
            Some(v) => v.clone(),
            None => BlockInstantiation::with_defaults(spec).slot_values.remove(&slot.name).expect("every slot has a default"),
        };
        if !slot.accepts(&value) {
            return Err(WorkspaceError::TypeMismatch { slot: slot.name.clone(), value });
        }
        inputs.insert(slot.name.clone(), Input::Literal(value));
    }
    Ok(inputs)
}

fn make_top_level(sprite: &mut Sprite, id: BlockId, at: Option<Position>) {
    let pos = at.unwrap_or_else(|| sprite.free_position());
    let block = sprite.blocks.get_mut(&id).expect("exists");
    block.parent = None;
    block.position = Some(pos);
    sprite.stacks.push(id);
}

/// Unlinks a block from whatever holds it, keeping the blocks below it
/// attached to it.
fn detach(sprite: &mut Sprite, id: BlockId) {
    let block = sprite.blocks.get_mut(&id).expect("exists");
    match block.parent.take() {
        Some(p) => {
            let parent = sprite.blocks.get_mut(&p).expect("linked");
            if parent.next == Some(id) {
                parent.next = None;
            } else if let Some(slot) = parent.input_slot_of(id) {
                parent.inputs.remove(&slot);
            }
        }
        None => {
            block.position = None;
            sprite.stacks.retain(|s| *s != id);
        }
    }
}

/// Hangs `displaced` below the end of the chain starting at `head`, or makes
/// it a new stack if that chain ends in a cap.
fn reattach_displaced(sprite: &mut Sprite, catalog: &BlockCatalog, head: BlockId, displaced: BlockId) {
    let tail = sprite.tail(head);
    let tail_shape = shape(sprite, catalog, tail).expect("exists");
    if tail_shape.has_next() {
        sprite.blocks.get_mut(&tail).expect("exists").next = Some(displaced);
        sprite.blocks.get_mut(&displaced).expect("exists").parent = Some(tail);
    } else {
        sprite.blocks.get_mut(&displaced).expect("exists").parent = None;
        make_top_level(sprite, displaced, None);
    }
}

fn attach_to_focus(sprite: &mut Sprite, catalog: &BlockCatalog, focus: BlockId, new: BlockId, new_shape: Shape) -> Result<()> {
    let focus_shape = shape(sprite, catalog, focus)?;
    let focused = sprite.blocks.get(&focus).expect("checked").clone();
    if focus_shape.has_substack() && focused.substack().is_none() && new_shape.has_previous() {
        sprite.blocks.get_mut(&focus).expect("checked").inputs.insert(SUBSTACK.into(), Input::Block(new));
        sprite.blocks.get_mut(&new).expect("exists").parent = Some(focus);
        return Ok(());
    }
    if new_shape == Shape::Hat {
        if focused.parent.is_some() || !focus_shape.has_previous() {
            return Err(illegal("a hat block can only go on top of a stack".into()));
        }
        let index = sprite.stacks.iter().position(|s| *s == focus).expect("top-level listed");
        sprite.stacks[index] = new;
        let above = sprite.blocks.get_mut(&new).expect("exists");
        above.position = focused.position;
        above.next = Some(focus);
        let below = sprite.blocks.get_mut(&focus).expect("checked");
        below.position = None;
        below.parent = Some(new);
        return Ok(());
    }
    if !focus_shape.has_next() {
        return Err(illegal(format!("nothing can go below {}", shape_name(focus_shape))));
    }
    if !new_shape.has_previous() {
        return Err(illegal(format!("{} cannot go below another block", shape_name(new_shape))));
    }
    if focused.next.is_some() && !new_shape.has_next() {
        return Err(illegal(format!("{} can only end a stack", shape_name(new_shape))));
    }
    sprite.blocks.get_mut(&focus).expect("checked").next = Some(new);
    let block = sprite.blocks.get_mut(&new).expect("exists");
    block.parent = Some(focus);
    block.next = focused.next;
    if let Some(n) = focused.next {
        sprite.blocks.get_mut(&n).expect("linked").parent = Some(new);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;

    fn ws() -> Workspace {
        Workspace::new(Arc::new(Config::bundled().catalog), 100)
    }

    fn inst(opcode: &str, slots: &[(&str, Value)]) -> BlockInstantiation {
        BlockInstantiation {
            opcode: opcode.into(),
            slot_values: slots.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            used_defaults: Default::default(),
        }
    }

    fn mv(steps: f64) -> BlockInstantiation {
        inst("motion_movesteps", &[("steps", Value::Number(steps))])
    }

    fn checked(ws: &Workspace) {
        validate::validate(ws.project(), ws.catalog()).unwrap();
    }

    #[test]
    fn place_on_empty_workspace() {
        let mut w = ws();
        let id = w.place_block(&mv(20.0)).unwrap();
        assert_eq!(w.sprite().stacks, [id]);
        assert_eq!(w.block(id).unwrap().literal("steps"), Some(&Value::Number(20.0)));
        assert_eq!(w.view().focused_block, Some(id));
        checked(&w);
    }

    #[test]
    fn place_appends_below_focus() {
        let mut w = ws();
        let a = w.place_block(&mv(20.0)).unwrap();
        let b = w.place_block(&inst("control_wait", &[("secs", Value::Number(1.0))])).unwrap();
        assert_eq!(w.block(a).unwrap().next, Some(b));
        assert_eq!(w.block(b).unwrap().parent, Some(a));
        // Focus back on the top: the next block is spliced in between.
        w.focus(Some(a)).unwrap();
        let c = w.place_block(&mv(5.0)).unwrap();
        assert_eq!(w.block(a).unwrap().next, Some(c));
        assert_eq!(w.block(c).unwrap().next, Some(b));
        checked(&w);
    }

    #[test]
    fn hat_rules() {
        let mut w = ws();
        let a = w.place_block(&mv(1.0)).unwrap();
        let b = w.place_block(&mv(2.0)).unwrap();
        let err = w.place_block(&inst("event_whenflagclicked", &[])).unwrap_err();
        assert!(matches!(err, WorkspaceError::IllegalConnection(_)));
        w.focus(Some(a)).unwrap();
        let hat = w.place_block(&inst("event_whenflagclicked", &[])).unwrap();
        assert_eq!(w.sprite().stacks, [hat]);
        assert_eq!(w.block(hat).unwrap().next, Some(a));
        assert_eq!(w.block(hat).unwrap().position, Some(Position { x: 0, y: 0 }));
        assert_eq!(w.block(a).unwrap().next, Some(b));
        checked(&w);
    }

    #[test]
    fn nothing_attaches_under_a_cap() {
        let mut w = ws();
        w.place_block(&inst("control_stop", &[])).unwrap();
        let err = w.place_block(&mv(1.0)).unwrap_err();
        assert!(matches!(err, WorkspaceError::IllegalConnection(_)));
        assert_eq!(w.undo_len(), 1);
    }

    #[test]
    fn c_blocks_take_a_body() {
        let mut w = ws();
        let rep = w.place_block(&inst("control_repeat", &[])).unwrap();
        let body = w.place_block(&mv(3.0)).unwrap();
        assert_eq!(w.block(rep).unwrap().substack(), Some(body));
        let after = w.place_block(&mv(4.0)).unwrap();
        assert_eq!(w.block(body).unwrap().next, Some(after));
        w.focus(Some(rep)).unwrap();
        let below = w.place_block(&mv(5.0)).unwrap();
        assert_eq!(w.block(rep).unwrap().next, Some(below));
        checked(&w);
        assert_eq!(w.delete_block(rep).unwrap(), 3);
        assert_eq!(w.sprite().stacks, [below]);
        checked(&w);
    }

    #[test]
    fn connect_and_cycles() {
        let mut w = ws();
        let a = w.place_block_at(&mv(1.0), Position { x: 0, y: 0 }).unwrap();
        let b = w.place_block_at(&mv(2.0), Position { x: 0, y: 80 }).unwrap();
        w.connect(a, b).unwrap();
        assert_eq!(w.block(a).unwrap().next, Some(b));
        assert_eq!(w.block(b).unwrap().position, None);
        assert_eq!(w.sprite().stacks, [a]);
        assert_eq!(w.connect(a, a), Err(WorkspaceError::Cycle { upper: a, lower: a }));
        assert_eq!(w.connect(b, a), Err(WorkspaceError::Cycle { upper: b, lower: a }));
        assert_eq!(w.connect(a, BlockId(99)), Err(WorkspaceError::UnknownBlock(BlockId(99))));
        checked(&w);
    }

    #[test]
    fn delete_splices() {
        let mut w = ws();
        let a = w.place_block(&mv(1.0)).unwrap();
        let b = w.place_block(&mv(2.0)).unwrap();
        let c = w.place_block(&mv(3.0)).unwrap();
        w.delete_block(b).unwrap();
        assert_eq!(w.block(a).unwrap().next, Some(c));
        assert_eq!(w.block(c).unwrap().parent, Some(a));
        w.delete_block(a).unwrap();
        assert_eq!(w.sprite().stacks, [c]);
        w.delete_block(c).unwrap();
        assert!(w.sprite().blocks.is_empty());
        assert_eq!(w.delete_block(c), Err(WorkspaceError::UnknownBlock(c)));
        checked(&w);
    }

    #[test]
    fn set_input_checks_slot_and_type() {
        let mut w = ws();
        let a = w.place_block(&mv(10.0)).unwrap();
        w.set_input(a, "steps", Value::Number(50.0)).unwrap();
        assert_eq!(w.block(a).unwrap().literal("steps"), Some(&Value::Number(50.0)));
        assert!(matches!(w.set_input(a, "steps", "abc".into()), Err(WorkspaceError::TypeMismatch { .. })));
        assert!(matches!(w.set_input(a, "color", 1.0.into()), Err(WorkspaceError::UnknownSlot { .. })));
    }

    #[test]
    fn undo_redo_round_trip() {
        let mut w = ws();
        let before = w.serialize();
        w.place_block(&mv(20.0)).unwrap();
        let after = w.serialize();
        w.undo().unwrap();
        assert_eq!(w.serialize(), before);
        w.redo().unwrap();
        assert_eq!(w.serialize(), after);
        w.undo().unwrap();
        assert_eq!(w.undo(), Err(WorkspaceError::NothingToUndo));
        w.create_variable("score", VariableScope::Global).unwrap();
        assert_eq!(w.redo(), Err(WorkspaceError::NothingToRedo));
        assert_eq!(
            w.create_variable("score", VariableScope::Sprite),
            Err(WorkspaceError::DuplicateVariable("score".into()))
        );
    }

    #[test]
    fn undo_depth_is_bounded() {
        let mut w = Workspace::new(Arc::new(Config::bundled().catalog), 3);
        for i in 0..5 {
            w.place_block(&mv(i as f64)).unwrap();
        }
        assert_eq!(w.undo_len(), 3);
    }

    #[test]
    fn variables_and_sprites() {
        let mut w = ws();
        w.set_variable(DEFAULT_VARIABLE, Value::Number(3.0)).unwrap();
        assert_eq!(w.variable(DEFAULT_VARIABLE), Some(&Value::Number(3.0)));
        assert_eq!(w.set_variable("nope", 1.0.into()), Err(WorkspaceError::UnknownVariable("nope".into())));
        let s2 = w.add_sprite(None).unwrap();
        assert_eq!(w.sprite().name, "Sprite2");
        assert_eq!(w.view().selected_sprite, s2);
        assert_eq!(w.add_sprite(Some("sprite1")), Err(WorkspaceError::DuplicateSprite("sprite1".into())));
        w.select_sprite_named("Sprite1").unwrap();
        assert!(w.select_sprite_named("Cat").is_err());
    }

    #[test]
    fn new_stacks_use_the_first_free_row() {
        let mut w = ws();
        let a = w.place_block(&mv(1.0)).unwrap();
        w.place_block(&mv(2.0)).unwrap();
        w.focus(None).unwrap();
        let c = w.place_block(&mv(3.0)).unwrap();
        assert_eq!(w.block(a).unwrap().position, Some(Position { x: 0, y: 0 }));
        assert_eq!(w.block(c).unwrap().position, Some(Position { x: 0, y: 2 * GRID }));
    }
}
