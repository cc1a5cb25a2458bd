//! Project documents: sprites with nested stacks, versioned by a schema id.
//!
//! ```json
//! {"schema": "blockvoice.project/1",
//!  "sprites": [{"id": 1, "name": "Sprite1", "variables": {},
//!               "stacks": [{"x": 0, "y": 0, "blocks": [
//!                  {"id": 1, "opcode": "control_repeat", "inputs": {"times": 10},
//!                   "substack": [{"id": 2, "opcode": "motion_movesteps", "inputs": {"steps": 10}}]}]}]}],
//!  "stage": {"variables": {"my variable": 0}},
//!  "next_block": 3, "next_sprite": 2}
//! ```

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{validate, Block, BlockId, Input, Position, Project, Sprite, SpriteId, WorkspaceError, SUBSTACK};
use crate::config::BlockCatalog;
use crate::value::Value;

pub const PROJECT_SCHEMA: &str = "blockvoice.project/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectFile {
    pub schema: String,
    pub sprites: Vec<SpriteDoc>,
    pub stage: StageDoc,
    pub next_block: u32,
    pub next_sprite: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpriteDoc {
    pub id: SpriteId,
    pub name: String,
    #[serde(default)]
    pub variables: BTreeMap<String, Value>,
    #[serde(default)]
    pub stacks: Vec<StackDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageDoc {
    #[serde(default)]
    pub variables: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackDoc {
    pub x: i32,
    pub y: i32,
    pub blocks: Vec<BlockDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDoc {
    pub id: BlockId,
    pub opcode: String,
    #[serde(default)]
    pub inputs: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub substack: Vec<BlockDoc>,
}

impl ProjectFile {
    pub fn from_project(project: &Project) -> ProjectFile {
        ProjectFile {
            schema: PROJECT_SCHEMA.into(),
            sprites: project.sprites.iter().map(sprite_doc).collect(),
            stage: StageDoc { variables: project.stage_variables.clone() },
            next_block: project.next_block,
            next_sprite: project.next_sprite,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("project documents always serialize")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("project documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<ProjectFile, WorkspaceError> {
        serde_json::from_str(text).map_err(|e| WorkspaceError::InvalidProject(format!("{e}")))
    }

    /// Rebuilds the linked block graph and validates it against the catalog.
    pub fn into_project(self, catalog: &BlockCatalog) -> Result<Project, WorkspaceError> {
        if self.schema != PROJECT_SCHEMA {
            return Err(WorkspaceError::InvalidProject(format!("unsupported schema '{}'", self.schema)));
        }
        if self.sprites.is_empty() {
            return Err(WorkspaceError::InvalidProject("a project needs at least one sprite".into()));
        }
        let mut sprites = Vec::with_capacity(self.sprites.len());
        for doc in self.sprites {
            let mut sprite = Sprite {
                id: doc.id,
                name: doc.name,
                blocks: BTreeMap::new(),
                stacks: Vec::new(),
                variables: doc.variables,
            };
            for stack in doc.stacks {
                let Some(top) = stack.blocks.first().map(|b| b.id) else {
                    return Err(WorkspaceError::InvalidProject("empty stack".into()));
                };
                insert_chain(&mut sprite, stack.blocks, None, None)?;
                sprite.blocks.get_mut(&top).expect("inserted").position = Some(Position { x: stack.x, y: stack.y });
                sprite.stacks.push(top);
            }
            sprites.push(sprite);
        }
        let project = Project {
            sprites,
            stage_variables: self.stage.variables,
            next_block: self.next_block,
            next_sprite: self.next_sprite,
        };
        validate::validate(&project, catalog).map_err(|e| WorkspaceError::InvalidProject(format!("{e}")))?;
        Ok(project)
    }
}

fn sprite_doc(sprite: &Sprite) -> SpriteDoc {
    let stacks = sprite
        .stacks
        .iter()
        .map(|top| {
            let pos = sprite.blocks[top].position.unwrap_or_default();
            StackDoc { x: pos.x, y: pos.y, blocks: chain_docs(sprite, *top) }
        })
        .collect();
    SpriteDoc { id: sprite.id, name: sprite.name.clone(), variables: sprite.variables.clone(), stacks }
}

fn chain_docs(sprite: &Sprite, head: BlockId) -> Vec<BlockDoc> {
    let mut out = Vec::new();
    let mut cur = Some(head);
    while let Some(id) = cur {
        let block = &sprite.blocks[&id];
        let inputs = block
            .inputs
            .iter()
            .filter_map(|(k, v)| match v {
                Input::Literal(v) => Some((k.clone(), v.clone())),
                Input::Block(_) => None,
            })
            .collect();
        let substack = block.substack().map(|b| chain_docs(sprite, b)).unwrap_or_default();
        out.push(BlockDoc { id, opcode: block.opcode.clone(), inputs, substack });
        cur = block.next;
    }
    out
}

fn insert_chain(
    sprite: &mut Sprite,
    docs: Vec<BlockDoc>,
    parent: Option<BlockId>,
    container: Option<BlockId>,
) -> Result<(), WorkspaceError> {
    let mut prev: Option<BlockId> = None;
    for doc in docs {
        let id = doc.id;
        if sprite.blocks.contains_key(&id) {
            return Err(WorkspaceError::InvalidProject(format!("duplicate block id {id}")));
        }
        let up = prev.or(container).or(parent);
        let mut inputs: BTreeMap<String, Input> = doc.inputs.into_iter().map(|(k, v)| (k, Input::Literal(v))).collect();
        if let Some(first) = doc.substack.first() {
            inputs.insert(SUBSTACK.into(), Input::Block(first.id));
        }
        sprite.blocks.insert(id, Block { id, opcode: doc.opcode, inputs, next: None, parent: up, position: None });
        if let Some(p) = prev {
            sprite.blocks.get_mut(&p).expect("inserted").next = Some(id);
        }
        insert_chain(sprite, doc.substack, None, Some(id))?;
        prev = Some(id);
    }
    Ok(())
}
