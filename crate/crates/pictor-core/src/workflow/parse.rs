//! Parsers for agent replies. Agent output is free text, so every parser
//! here is total: any input maps to a parse result or a structured failure,
//! never a panic.
//!
//! Planner replies follow a fixed scaffold:
//!
//! ```text
//! THOUGHT 2: the legend is too small to read.
//! ACTION 2: Region_Magnification(image=img_0, x_start=2, x_end=4, scale=3)
//! ```
//!
//! and finish with
//!
//! ```text
//! THOUGHT 5: the answer is visible now.
//! FINAL ANSWER: 42
//! TERMINATE
//! ```
//!
//! Only the material from the last `THOUGHT` onward counts; models often
//! restate earlier steps and the restatement must not shadow the new one.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum ArgValue {
    /// Bare `img_<n>` token.
    ImageId(String),
    Num(f64),
    Str(String),
}

impl ArgValue {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            ArgValue::Str(s) => Some(s),
            ArgValue::ImageId(s) => Some(s),
            ArgValue::Num(_) => None,
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            ArgValue::Num(n) => Some(*n),
            // Quoted numbers still mean numbers.
            ArgValue::Str(s) => s.trim().parse().ok(),
            ArgValue::ImageId(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ActionCall {
    pub tool: String,
    pub args: Vec<(String, ArgValue)>,
}

impl ActionCall {
    pub fn arg(&self, name: &str) -> Option<&ArgValue> {
        self.args.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }
}

/// What the planner wants to do next.
#[derive(Debug, Clone, PartialEq)]
pub enum PlannerMove {
    Invoke { thought: String, action: ActionCall },
    Finish { thought: String, answer: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseFailure {
    pub message: String,
}

impl core::fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.message)
    }
}

fn fail(message: impl Into<String>) -> ParseFailure {
    ParseFailure { message: message.into() }
}

/// Does this line open a scaffold section (`THOUGHT 3:`, `ACTION:`,
/// `FINAL ANSWER:`)? Returns the content after the colon.
fn section_content<'a>(line: &'a str, keyword: &str) -> Option<&'a str> {
    let t = line.trim_start();
    let head = t.get(..keyword.len())?;
    if !head.eq_ignore_ascii_case(keyword) {
        return None;
    }
    let rest = &t[keyword.len()..];
    // Optional step number, then a colon.
    let rest = rest.trim_start();
    let rest = rest.trim_start_matches(|c: char| c.is_ascii_digit());
    let rest = rest.trim_start();
    rest.strip_prefix(':')
}

fn is_terminate(line: &str) -> bool {
    let t = line.trim().trim_end_matches('.');
    t.eq_ignore_ascii_case("terminate")
        || section_content(line, "ACTION").is_some_and(|c| {
            c.trim().trim_end_matches('.').eq_ignore_ascii_case("terminate")
        })
}

/// Splits `text` at commas that sit at parenthesis depth zero and outside
/// quotes, so `atan2(1, 2)` and `"a, b"` survive as single values.
fn split_top_level(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut quote: Option<char> = None;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match quote {
            Some(q) => {
                if c == q {
                    quote = None;
                }
            }
            None => match c {
                '"' | '\'' => quote = Some(c),
                '(' | '[' => depth += 1,
                ')' | ']' => depth -= 1,
                ',' if depth == 0 => {
                    parts.push(&text[start..i]);
                    start = i + 1;
                }
                _ => {}
            },
        }
    }
    parts.push(&text[start..]);
    parts
}

fn strip_matching_quotes(s: &str) -> Option<&str> {
    let s = s.trim();
    for q in ['"', '\''] {
        if s.len() >= 2 && s.starts_with(q) && s.ends_with(q) {
            return Some(&s[1..s.len() - 1]);
        }
    }
    None
}

fn parse_value(raw: &str) -> ArgValue {
    if let Some(inner) = strip_matching_quotes(raw) {
        return ArgValue::Str(inner.to_string());
    }
    let bare = raw.trim();
    if let Some(n) = bare.strip_prefix("img_") {
        if !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()) {
            return ArgValue::ImageId(bare.to_string());
        }
    }
    if let Ok(v) = bare.parse::<f64>() {
        if v.is_finite() {
            return ArgValue::Num(v);
        }
    }
    ArgValue::Str(bare.to_string())
}

/// Parses `Tool_Name(key=value, ...)`.
pub fn parse_action_call(text: &str) -> Result<ActionCall, ParseFailure> {
    let text = text.trim();
    let open = text.find('(').ok_or_else(|| fail("action has no argument list"))?;
    let close = text.rfind(')').ok_or_else(|| fail("action has no closing parenthesis"))?;
    if close < open {
        return Err(fail("mismatched parentheses in action"));
    }
    let tool = text[..open].trim();
    if tool.is_empty() || !tool.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(fail(format!("'{tool}' is not a tool name")));
    }
    let body = &text[open + 1..close];
    let mut args = Vec::new();
    if !body.trim().is_empty() {
        for part in split_top_level(body) {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let eq = part.find('=').ok_or_else(|| {
                fail(format!("argument '{part}' is not in key=value form"))
            })?;
            let key = part[..eq].trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(fail(format!("bad argument name '{key}'")));
            }
            args.push((key.to_string(), parse_value(&part[eq + 1..])));
        }
    }
    Ok(ActionCall { tool: tool.to_string(), args })
}

/// Renders an action call back into its textual form. String values are
/// always double-quoted, so `parse_action_call(render_action(c)) == c` for
/// strings that do not themselves contain double quotes.
pub fn render_action(call: &ActionCall) -> String {
    let mut parts = Vec::new();
    for (k, v) in &call.args {
        let rendered = match v {
            ArgValue::ImageId(id) => id.clone(),
            ArgValue::Num(n) => format!("{n}"),
            ArgValue::Str(s) => format!("\"{s}\""),
        };
        parts.push(format!("{k}={rendered}"));
    }
    format!("{}({})", call.tool, parts.join(", "))
}

/// Parses a planner reply into its next move, using only the last scaffold
/// block. `FINAL ANSWER` finishes the episode (a trailing `TERMINATE` is
/// conventional but optional); `TERMINATE` without an answer is an error.
pub fn parse_planner_reply(text: &str) -> Result<PlannerMove, ParseFailure> {
    let lines: Vec<&str> = text.lines().collect();
    let last_thought = lines
        .iter()
        .rposition(|l| section_content(l, "THOUGHT").is_some());
    let scope: &[&str] = match last_thought {
        Some(i) => &lines[i..],
        None => &lines,
    };

    // Collect the thought: content on the THOUGHT line plus following lines
    // until the next section marker.
    let mut thought = String::new();
    let mut rest_start = 0;
    if let Some(first) = scope.first() {
        if let Some(content) = section_content(first, "THOUGHT") {
            thought.push_str(content.trim());
            rest_start = 1;
            for (off, line) in scope[1..].iter().enumerate() {
                if section_content(line, "ACTION").is_some()
                    || section_content(line, "FINAL ANSWER").is_some()
                    || is_terminate(line)
                {
                    rest_start = 1 + off;
                    break;
                }
                if !thought.is_empty() {
                    thought.push(' ');
                }
                thought.push_str(line.trim());
                rest_start = 2 + off;
            }
        }
    }
    let rest = &scope[rest_start..];

    if let Some(i) = rest
        .iter()
        .position(|l| section_content(l, "FINAL ANSWER").is_some())
    {
        let mut answer = String::from(
            section_content(rest[i], "FINAL ANSWER").unwrap_or("").trim(),
        );
        for line in &rest[i + 1..] {
            if is_terminate(line) {
                break;
            }
            if !line.trim().is_empty() {
                if !answer.is_empty() {
                    answer.push(' ');
                }
                answer.push_str(line.trim());
            }
        }
        return Ok(PlannerMove::Finish { thought, answer });
    }

    if let Some(i) = rest.iter().position(|l| section_content(l, "ACTION").is_some()) {
        let line = rest[i];
        if is_terminate(line) {
            return Err(fail("TERMINATE without a FINAL ANSWER"));
        }
        let content = section_content(line, "ACTION").unwrap();
        // The call may spill onto following lines until it balances.
        let mut call_text = String::from(content.trim());
        if call_text.matches('(').count() > call_text.matches(')').count() {
            for cont in &rest[i + 1..] {
                call_text.push(' ');
                call_text.push_str(cont.trim());
                if call_text.matches('(').count() <= call_text.matches(')').count() {
                    break;
                }
            }
        }
        let action = parse_action_call(&call_text)?;
        return Ok(PlannerMove::Invoke { thought, action });
    }

    if rest.iter().any(|l| is_terminate(l)) {
        return Err(fail("TERMINATE without a FINAL ANSWER"));
    }
    Err(fail("no ACTION or FINAL ANSWER found"))
}

/// Planning critic verdict on a finished round.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Critique {
    /// True when the critic wants another round.
    pub adjustment: bool,
    /// Replacement tool selection for the next round, when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tools: Option<Vec<String>>,
    /// Free-text advice carried into the next round's planner prompt.
    pub suggestions: String,
}

/// Parses a planning-critic reply:
///
/// ```text
/// ADJUSTMENT: True
/// tools: [Region_Magnification, Numerical_Computation]
/// Read the tick labels in the magnified view before answering.
/// ```
///
/// A reply with no recognizable ADJUSTMENT line counts as "no adjustment";
/// an unparseable critic must never force extra rounds.
pub fn parse_critique(text: &str) -> Critique {
    let mut adjustment = None;
    let mut tools = None;
    let mut suggestions: Vec<&str> = Vec::new();

    for line in text.lines() {
        if let Some(content) = section_content(line, "ADJUSTMENT") {
            let word = content
                .trim()
                .split(|c: char| !c.is_ascii_alphanumeric())
                .next()
                .unwrap_or("");
            if word.eq_ignore_ascii_case("true") || word.eq_ignore_ascii_case("yes") {
                adjustment = Some(true);
            } else if word.eq_ignore_ascii_case("false") || word.eq_ignore_ascii_case("no") {
                adjustment = Some(false);
            }
            continue;
        }
        if let Some(content) = section_content(line, "TOOLS") {
            if let Some(names) = parse_bracket_list(content) {
                tools = Some(names);
                continue;
            }
        }
        if !line.trim().is_empty() {
            suggestions.push(line.trim());
        }
    }

    match adjustment {
        Some(adjustment) => Critique {
            adjustment,
            // A tool list only means something when another round happens.
            tools: if adjustment { tools } else { None },
            suggestions: suggestions.join("\n"),
        },
        None => Critique {
            adjustment: false,
            tools: None,
            suggestions: "critic-unparseable".to_string(),
        },
    }
}

/// Extracts the first `[a, b, c]` list from `text`. `Some(vec![])` for an
/// empty list, `None` when no bracketed list is present.
pub fn parse_bracket_list(text: &str) -> Option<Vec<String>> {
    let open = text.find('[')?;
    let close = text[open..].find(']')? + open;
    let body = &text[open + 1..close];
    let items = body
        .split(',')
        .map(|s| strip_matching_quotes(s).unwrap_or(s.trim()).trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    Some(items)
}

/// Visual critic verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticVerdict {
    pub pass: bool,
    pub reason: String,
}

/// Reads the first `true`/`false` word out of a visual critic reply. A
/// critic that answers neither fails open: a flaky critic must not block
/// progress, only a deliberate `false` does.
pub fn parse_visual_verdict(text: &str) -> CriticVerdict {
    for word in text.split(|c: char| !c.is_ascii_alphanumeric()) {
        if word.eq_ignore_ascii_case("true") {
            return CriticVerdict { pass: true, reason: text.trim().to_string() };
        }
        if word.eq_ignore_ascii_case("false") {
            return CriticVerdict { pass: false, reason: text.trim().to_string() };
        }
    }
    CriticVerdict { pass: true, reason: "critic-unparseable".to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn parses_thought_action_pair() {
        let reply = "THOUGHT 1: the legend overlaps the lines.\n\
                     ACTION 1: Masking_Data_with_Legend(image=img_0, item=\"west\", mode=remove)";
        let mv = parse_planner_reply(reply).unwrap();
        match mv {
            PlannerMove::Invoke { thought, action } => {
                assert_eq!(thought, "the legend overlaps the lines.");
                assert_eq!(action.tool, "Masking_Data_with_Legend");
                assert_eq!(action.arg("image"), Some(&ArgValue::ImageId("img_0".into())));
                assert_eq!(action.arg("item"), Some(&ArgValue::Str("west".into())));
                assert_eq!(action.arg("mode"), Some(&ArgValue::Str("remove".into())));
            }
            other => panic!("wrong move: {other:?}"),
        }
    }

    #[test]
    fn only_the_last_thought_counts() {
        let reply = "THOUGHT 1: first try.\nACTION 1: Subfigure_Cropping(image=img_0, target=a)\n\
                     OBSERVATION 1: stored img_1\n\
                     THOUGHT 2: done.\nFINAL ANSWER: 7\nTERMINATE";
        let mv = parse_planner_reply(reply).unwrap();
        assert_eq!(
            mv,
            PlannerMove::Finish { thought: "done.".into(), answer: "7".into() }
        );
    }

    #[test]
    fn action_without_thought_is_accepted() {
        let mv = parse_planner_reply("ACTION: Numerical_Computation(expression=\"1+2\")").unwrap();
        match mv {
            PlannerMove::Invoke { thought, action } => {
                assert_eq!(thought, "");
                assert_eq!(action.tool, "Numerical_Computation");
            }
            other => panic!("wrong move: {other:?}"),
        }
    }

    #[test]
    fn terminate_without_answer_is_rejected() {
        assert!(parse_planner_reply("THOUGHT 3: giving up.\nACTION 3: TERMINATE").is_err());
        assert!(parse_planner_reply("TERMINATE").is_err());
    }

    #[test]
    fn final_answer_without_terminate_is_accepted() {
        let mv = parse_planner_reply("THOUGHT 2: clear now.\nFINAL ANSWER: 12.5").unwrap();
        assert_eq!(
            mv,
            PlannerMove::Finish { thought: "clear now.".into(), answer: "12.5".into() }
        );
    }

    #[test]
    fn multiline_answer_is_joined() {
        let mv =
            parse_planner_reply("FINAL ANSWER: the two lines\ncross at x = 4\nTERMINATE").unwrap();
        match mv {
            PlannerMove::Finish { answer, .. } => {
                assert_eq!(answer, "the two lines cross at x = 4");
            }
            other => panic!("wrong move: {other:?}"),
        }
    }

    #[test]
    fn commas_inside_calls_and_quotes_do_not_split_args() {
        let call = parse_action_call(
            "Numerical_Computation(expression=\"atan2(3, 4) + 1\", note='a, b')",
        )
        .unwrap();
        assert_eq!(call.arg("expression"), Some(&ArgValue::Str("atan2(3, 4) + 1".into())));
        assert_eq!(call.arg("note"), Some(&ArgValue::Str("a, b".into())));
    }

    #[test]
    fn bare_values_classify_by_shape() {
        let call =
            parse_action_call("Tool(image=img_12, scale=2.5, mode=remove, odd=img_x)").unwrap();
        assert_eq!(call.arg("image"), Some(&ArgValue::ImageId("img_12".into())));
        assert_eq!(call.arg("scale"), Some(&ArgValue::Num(2.5)));
        assert_eq!(call.arg("mode"), Some(&ArgValue::Str("remove".into())));
        assert_eq!(call.arg("odd"), Some(&ArgValue::Str("img_x".into())));
    }

    #[test]
    fn action_spilling_to_next_line_is_joined() {
        let reply = "THOUGHT 1: zoom in.\nACTION 1: Region_Magnification(image=img_0,\n\
                     x_start=2, x_end=4, scale=3)";
        let mv = parse_planner_reply(reply).unwrap();
        match mv {
            PlannerMove::Invoke { action, .. } => {
                assert_eq!(action.args.len(), 4);
                assert_eq!(action.arg("scale"), Some(&ArgValue::Num(3.0)));
            }
            other => panic!("wrong move: {other:?}"),
        }
    }

    #[test]
    fn render_round_trips() {
        let call = ActionCall {
            tool: "Masking_Data_with_Legend".into(),
            args: vec![
                ("image".into(), ArgValue::ImageId("img_3".into())),
                ("item".into(), ArgValue::Str("north east".into())),
                ("mode".into(), ArgValue::Str("keep_only".into())),
            ],
        };
        let rendered = render_action(&call);
        assert_eq!(
            rendered,
            "Masking_Data_with_Legend(image=img_3, item=\"north east\", mode=\"keep_only\")"
        );
        assert_eq!(parse_action_call(&rendered).unwrap(), call);
    }

    #[test]
    fn critique_parses_adjustment_tools_and_advice() {
        let c = parse_critique(
            "ADJUSTMENT: True\ntools: [Region_Magnification, Numerical_Computation]\n\
             Read the ticks first.\nThen compute the gap.",
        );
        assert!(c.adjustment);
        assert_eq!(
            c.tools,
            Some(vec!["Region_Magnification".to_string(), "Numerical_Computation".to_string()])
        );
        assert_eq!(c.suggestions, "Read the ticks first.\nThen compute the gap.");
    }

    #[test]
    fn critique_false_drops_tool_list() {
        let c = parse_critique("ADJUSTMENT: False\ntools: [Subfigure_Cropping]\nLooks right.");
        assert!(!c.adjustment);
        assert_eq!(c.tools, None);
        assert_eq!(c.suggestions, "Looks right.");
    }

    #[test]
    fn unparseable_critique_means_no_adjustment() {
        let c = parse_critique("I cannot decide.");
        assert!(!c.adjustment);
        assert_eq!(c.suggestions, "critic-unparseable");
    }

    #[test]
    fn bracket_list_forms() {
        assert_eq!(parse_bracket_list("pick [a, 'b c', d]"), Some(vec![
            "a".to_string(),
            "b c".to_string(),
            "d".to_string()
        ]));
        assert_eq!(parse_bracket_list("[]"), Some(vec![]));
        assert_eq!(parse_bracket_list("no list here"), None);
    }

    #[test]
    fn visual_verdict_reads_first_boolean() {
        assert!(parse_visual_verdict("True, the value is readable.").pass);
        assert!(!parse_visual_verdict("false - the region is blank").pass);
        let v = parse_visual_verdict("hmm");
        assert!(v.pass);
        assert_eq!(v.reason, "critic-unparseable");
    }

    #[test]
    fn garbage_inputs_do_not_panic() {
        for s in ["", "((((", "THOUGHT", "ACTION :::", "a=b", "[", "]]][[", "\u{1F600}=\u{1F600}"] {
            let _ = parse_planner_reply(s);
            let _ = parse_critique(s);
            let _ = parse_bracket_list(s);
            let _ = parse_visual_verdict(s);
        }
    }
}
