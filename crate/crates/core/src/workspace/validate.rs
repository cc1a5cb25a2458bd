//! Full consistency check of a project's block graph.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;

use thiserror::Error;

use super::{BlockId, Input, Project, Sprite, SUBSTACK};
use crate::config::BlockCatalog;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("sprite '{sprite}': {problem}")]
pub struct Violation {
    pub sprite: String,
    pub problem: String,
}

pub fn validate(project: &Project, catalog: &BlockCatalog) -> Result<(), Violation> {
    let mut names = BTreeSet::new();
    let mut ids = BTreeSet::new();
    let mut block_ids = BTreeSet::new();
    for sprite in &project.sprites {
        let fail = |problem: String| Violation { sprite: sprite.name.clone(), problem };
        if !names.insert(sprite.name.to_lowercase()) {
            return Err(fail("duplicate sprite name".into()));
        }
        if !ids.insert(sprite.id) || sprite.id.0 >= project.next_sprite {
            return Err(fail(format!("bad sprite id {}", sprite.id.0)));
        }
        for id in sprite.blocks.keys() {
            if !block_ids.insert(*id) || id.0 >= project.next_block {
                return Err(fail(format!("bad block id {id}")));
            }
        }
        validate_sprite(sprite, catalog).map_err(fail)?;
    }
    Ok(())
}

fn validate_sprite(sprite: &Sprite, catalog: &BlockCatalog) -> Result<(), String> {
    let mut tops = BTreeSet::new();
    for top in &sprite.stacks {
        if !tops.insert(*top) {
            return Err(format!("stack {top} listed twice"));
        }
    }
    for (id, block) in &sprite.blocks {
        if block.id != *id {
            return Err(format!("block keyed {id} claims id {}", block.id));
        }
        let spec = catalog.get(&block.opcode).ok_or_else(|| format!("{id}: unknown opcode '{}'", block.opcode))?;
        for slot in &spec.slots {
            match block.inputs.get(&slot.name) {
                Some(Input::Literal(v)) if slot.accepts(v) => {}
                Some(Input::Literal(v)) => return Err(format!("{id}.{}: bad value {v:?}", slot.name)),
                Some(Input::Block(_)) => return Err(format!("{id}.{}: block in literal input", slot.name)),
                None => return Err(format!("{id}: missing input '{}'", slot.name)),
            }
        }
        for (name, input) in &block.inputs {
            let known = spec.slot(name).is_some() || (name == SUBSTACK && spec.shape.has_substack());
            if !known {
                return Err(format!("{id}: unexpected input '{name}'"));
            }
            if name == SUBSTACK && !matches!(input, Input::Block(_)) {
                return Err(format!("{id}: body holds a literal"));
            }
            if let Input::Block(child) = input {
                let c = sprite.blocks.get(child).ok_or_else(|| format!("{id}.{name}: dangling {child}"))?;
                if c.parent != Some(*id) {
                    return Err(format!("{child} is in {id}.{name} but its parent is {:?}", c.parent));
                }
                let child_shape = catalog.get(&c.opcode).map(|s| s.shape);
                if !child_shape.is_some_and(|s| s.has_previous()) {
                    return Err(format!("{child} cannot sit in a body"));
                }
            }
        }
        if let Some(next) = block.next {
            let n = sprite.blocks.get(&next).ok_or_else(|| format!("{id}: dangling next {next}"))?;
            if n.parent != Some(*id) {
                return Err(format!("{id}.next = {next} but its parent is {:?}", n.parent));
            }
            let lower = catalog.get(&n.opcode).map(|s| s.shape);
            if !spec.shape.has_next() || !lower.is_some_and(|s| s.has_previous()) {
                return Err(format!("{next} cannot follow {id}"));
            }
        }
        match block.parent {
            Some(p) => {
                let parent = sprite.blocks.get(&p).ok_or_else(|| format!("{id}: dangling parent {p}"))?;
                let as_next = parent.next == Some(*id);
                let as_input = parent.inputs.values().filter(|i| matches!(i, Input::Block(b) if b == id)).count();
                if usize::from(as_next) + as_input != 1 {
                    return Err(format!("{p} does not hold {id} exactly once"));
                }
                if block.position.is_some() || tops.contains(id) {
                    return Err(format!("{id} has a parent but is top-level"));
                }
            }
            None => {
                if block.position.is_none() || !tops.contains(id) {
                    return Err(format!("{id} is detached"));
                }
            }
        }
        if !reaches_top(sprite, *id) {
            return Err(format!("{id} is on a cycle"));
        }
    }
    if let Some(missing) = tops.iter().find(|t| !sprite.blocks.contains_key(t)) {
        return Err(format!("stack {missing} does not exist"));
    }
    Ok(())
}

fn reaches_top(sprite: &Sprite, id: BlockId) -> bool {
    let mut cur = id;
    for _ in 0..=sprite.blocks.len() {
        match sprite.blocks.get(&cur).and_then(|b| b.parent) {
            Some(p) => cur = p,
            None => return true,
        }
    }
    false
}
