//! Prompt templates and slot filling.
//!
//! Templates live as plain text files under `templates/` and are compiled
//! in. Slots are written `<|name|>`; [`render_template`] replaces known
//! slots and leaves unknown `<|...|>` sequences verbatim, which lets a
//! template instruct a model to emit literal tags (the coordinate reply
//! format does this).

use alloc::string::String;

pub const PLANNER: &str = include_str!("../../templates/planner.txt");
pub const DISPATCHER: &str = include_str!("../../templates/dispatcher.txt");
pub const REASONER: &str = include_str!("../../templates/reasoner.txt");
pub const VISUAL_CRITIC_ANSWERABILITY: &str =
    include_str!("../../templates/visual_critic_answerability.txt");
pub const VISUAL_CRITIC_GOAL: &str = include_str!("../../templates/visual_critic_goal.txt");
pub const PLANNING_CRITIC: &str = include_str!("../../templates/planning_critic.txt");
pub const JUDGE: &str = include_str!("../../templates/judge.txt");
pub const GROUNDING_LOCATE: &str = include_str!("../../templates/grounding_locate.txt");

/// Replaces each `<|name|>` slot with its value. Slots not in `slots` stay
/// as written.
pub fn render_template(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = String::from(template);
    for (name, value) in slots {
        let marker = alloc::format!("<|{name}|>");
        out = out.replace(&marker, value);
    }
    out
}
