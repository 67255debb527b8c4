//! Name resolution for builtin systems, games and behaviors. Anything that
//! is not a builtin name is read as a JSON file.

use crate::UsageError;
use anyhow::{Context, Result};
use sdlift::behaviors::{Behavior, PdDecomposition};
use sdlift::blcs::{chsh_system, magic_square, magic_star, Blcs};
use sdlift::games::{
    blcs_to_game_named, chsh_xor_game, compact_star_game, ghz_cube_game, mermin_ghz_game, NonlocalGame,
};
use sdlift::lifting::{
    lifted_chsh_game, lifted_chsh_system, lifted_ghz_game, magic_square_game, sdl_magic_square,
    sdl_magic_square_game, sdl_magic_star, sdl_magic_star_game,
};
use sdlift::quantum::{
    behavior_from_strategy, ghz_cube_strategy, sdlmsq_behavior, sdlmsq_decomposition, sdlmstar_behavior,
    sdlmstar_decomposition, tsirelson_behavior, uniform_on_winning,
};
use std::path::Path;

pub const SYSTEMS: [&str; 6] = ["magic_square", "magic_star", "sdl_magic_square", "sdl_magic_star", "chsh", "lifted_chsh"];
pub const GAMES: [&str; 10] = [
    "magic_square",
    "magic_star",
    "sdl_magic_square",
    "sdl_magic_star",
    "chsh",
    "chsh_xor",
    "lifted_chsh",
    "ghz_cube",
    "lifted_ghz",
    "mermin_ghz",
];
pub const BEHAVIORS: [&str; 6] = [
    "sdl_magic_square_behavior",
    "sdl_magic_star_behavior",
    "tsirelson",
    "pr_box",
    "ghz_cube_behavior",
    "mermin_ghz_behavior",
];

fn unknown(kind: &str, name: &str, known: &[&str]) -> anyhow::Error {
    UsageError(format!("unknown {kind} `{name}` (not a builtin and no such file); builtins: {}", known.join(", "))).into()
}

fn read_file(kind: &str, name: &str, known: &[&str]) -> Result<String> {
    if !Path::new(name).is_file() {
        return Err(unknown(kind, name, known));
    }
    std::fs::read_to_string(name).with_context(|| format!("reading {name}"))
}

pub fn system(name: &str) -> Result<Blcs> {
    Ok(match name {
        "magic_square" => magic_square(),
        "magic_star" => magic_star(),
        "sdl_magic_square" => sdl_magic_square(),
        "sdl_magic_star" => sdl_magic_star(),
        "chsh" => chsh_system(),
        "lifted_chsh" => lifted_chsh_system(),
        _ => {
            let text = read_file("system", name, &SYSTEMS)?;
            Blcs::from_json(&text).map_err(|e| UsageError(format!("{name}: {e}")))?
        }
    })
}

/// Builtin game, or the constraint-system game of a system file.
pub fn game(name: &str) -> Result<NonlocalGame> {
    Ok(match name {
        "magic_square" => magic_square_game(),
        "magic_star" => compact_star_game(&magic_star(), "magic_star")?,
        "sdl_magic_square" => sdl_magic_square_game(),
        "sdl_magic_star" => sdl_magic_star_game(),
        "chsh" => blcs_to_game_named(&chsh_system(), "chsh"),
        "chsh_xor" => chsh_xor_game(),
        "lifted_chsh" => lifted_chsh_game(),
        "ghz_cube" => ghz_cube_game(),
        "lifted_ghz" => lifted_ghz_game(),
        "mermin_ghz" => mermin_ghz_game(),
        _ => {
            let text = read_file("game", name, &GAMES)?;
            let s = Blcs::from_json(&text).map_err(|e| UsageError(format!("{name}: {e}")))?;
            blcs_to_game_named(&s, name)
        }
    })
}

/// Whether `build` emits a game rather than a constraint system.
pub fn is_game_only(name: &str) -> bool {
    matches!(name, "chsh_xor" | "ghz_cube" | "lifted_ghz" | "mermin_ghz")
}

/// A behavior with the game it is scored against and, for the SDL families,
/// closed-form decompositions.
pub struct LoadedBehavior {
    pub behavior: Behavior,
    pub game: Option<NonlocalGame>,
    family: Family,
}

enum Family {
    Square,
    Star,
    None,
}

impl LoadedBehavior {
    /// Closed-form partially deterministic decomposition at `x`, if known.
    pub fn decomposition(&self, x: &[usize]) -> Result<Option<PdDecomposition>> {
        Ok(match self.family {
            Family::Square => Some(sdlmsq_decomposition(x[0] + 1, x[1] + 1)?),
            Family::Star => Some(sdlmstar_decomposition(x[0] + 1, x[1])?),
            Family::None => None,
        })
    }
}

pub fn behavior(name: &str) -> Result<LoadedBehavior> {
    let with = |behavior, game, family| LoadedBehavior { behavior, game: Some(game), family };
    Ok(match name {
        "sdl_magic_square_behavior" => with(sdlmsq_behavior(), sdl_magic_square_game(), Family::Square),
        "sdl_magic_star_behavior" => with(sdlmstar_behavior(), sdl_magic_star_game(), Family::Star),
        "tsirelson" => with(tsirelson_behavior()?, chsh_xor_game(), Family::None),
        "pr_box" => with(uniform_on_winning(&chsh_xor_game()), chsh_xor_game(), Family::None),
        "ghz_cube_behavior" => {
            let g = ghz_cube_game();
            with(behavior_from_strategy(&g, &ghz_cube_strategy()?)?, g, Family::None)
        }
        "mermin_ghz_behavior" => with(uniform_on_winning(&mermin_ghz_game()), mermin_ghz_game(), Family::None),
        _ => {
            let text = read_file("behavior", name, &BEHAVIORS)?;
            let behavior = Behavior::from_json(&text).map_err(|e| UsageError(format!("{name}: {e}")))?;
            LoadedBehavior { behavior, game: None, family: Family::None }
        }
    })
}

/// The canonical quantum behavior of a builtin game, for `value` without
/// `--classical`.
pub fn canonical_behavior(game: &str) -> Option<&'static str> {
    Some(match game {
        "sdl_magic_square" => "sdl_magic_square_behavior",
        "sdl_magic_star" => "sdl_magic_star_behavior",
        "chsh_xor" => "tsirelson",
        "ghz_cube" => "ghz_cube_behavior",
        "mermin_ghz" => "mermin_ghz_behavior",
        _ => return None,
    })
}
