//! Catalog of tools the planning agents may call: canonical names, accepted
//! aliases, parameter shapes, and one-line descriptions for prompt text.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use alloc::format;

/// How a parameter value is interpreted when an action is parsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgType {
    /// Free text (series names, element descriptions, expressions).
    Str,
    /// A number.
    Num,
    /// Reference to an image in the pool (`img_3`).
    ImageId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub ty: ArgType,
    pub required: bool,
}

const fn req(name: &'static str, ty: ArgType) -> ParamSpec {
    ParamSpec { name, ty, required: true }
}

const fn opt(name: &'static str, ty: ArgType) -> ParamSpec {
    ParamSpec { name, ty, required: false }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolSpec {
    /// Canonical name as shown to agents.
    pub name: &'static str,
    /// Alternative spellings accepted from agent output.
    pub aliases: &'static [&'static str],
    pub params: &'static [ParamSpec],
    pub description: &'static str,
}

impl ToolSpec {
    pub fn matches(&self, name: &str) -> bool {
        let name = name.trim();
        self.name.eq_ignore_ascii_case(name)
            || self.aliases.iter().any(|a| a.eq_ignore_ascii_case(name))
    }
}

const STANDARD: &[ToolSpec] = &[
    ToolSpec {
        name: "Subfigure_Cropping",
        aliases: &["crop_subfigure", "crop"],
        params: &[req("image", ArgType::ImageId), req("target", ArgType::Str)],
        description: "Crop one subplot or region out of a figure, keeping its legend with it. \
                      Use when a multi-panel figure or a busy chart makes the relevant part hard to read.",
    },
    ToolSpec {
        name: "Region_Magnification",
        aliases: &["magnify_region", "magnify", "zoom"],
        params: &[
            req("image", ArgType::ImageId),
            opt("x_start", ArgType::Num),
            opt("x_end", ArgType::Num),
            opt("y_start", ArgType::Num),
            opt("y_end", ArgType::Num),
            req("scale", ArgType::Num),
        ],
        description: "Magnify the part of a chart between axis values, keeping tick labels visible. \
                      Use when values are too close together to compare at native resolution.",
    },
    ToolSpec {
        name: "Adding_Auxiliary_Lines",
        aliases: &["add_auxiliary_line", "auxiliary_line"],
        params: &[
            req("image", ArgType::ImageId),
            req("axis", ArgType::Str),
            req("value", ArgType::Num),
        ],
        description: "Draw a dashed guide line across the chart at a given axis value. \
                      Use to compare data heights against a reference level or position.",
    },
    ToolSpec {
        name: "Masking_Data_with_Legend",
        aliases: &["mask_by_legend", "mask_series"],
        params: &[
            req("image", ArgType::ImageId),
            req("item", ArgType::Str),
            req("mode", ArgType::Str),
        ],
        description: "Hide or isolate one series by its legend entry (mode: remove or keep_only). \
                      Use when overlapping series make one hard to follow.",
    },
    ToolSpec {
        name: "Point_Connection",
        aliases: &["connect_points", "connect"],
        params: &[
            req("image", ArgType::ImageId),
            req("a", ArgType::Str),
            req("b", ArgType::Str),
        ],
        description: "Draw a dashed segment between two labeled points and report its pixel length. \
                      Use in diagrams to make a distance or alignment visible.",
    },
    ToolSpec {
        name: "Perpendicular_Line_Construction",
        aliases: &["construct_perpendicular", "perpendicular"],
        params: &[
            req("image", ArgType::ImageId),
            req("point", ArgType::Str),
            req("line_a", ArgType::Str),
            req("line_b", ArgType::Str),
        ],
        description: "Drop a perpendicular from a labeled point onto a line through two labeled \
                      points; the foot is labeled and its coordinates reported.",
    },
    ToolSpec {
        name: "Parallel_Line_Construction",
        aliases: &["construct_parallel", "parallel"],
        params: &[
            req("image", ArgType::ImageId),
            req("point", ArgType::Str),
            req("line_a", ArgType::Str),
            req("line_b", ArgType::Str),
        ],
        description: "Draw the line through a labeled point parallel to a line through two \
                      labeled points.",
    },
    ToolSpec {
        name: "Numerical_Computation",
        aliases: &["eval_expression", "calculate", "calculator"],
        params: &[req("expression", ArgType::Str)],
        description: "Evaluate an arithmetic expression (operators + - * / ^, functions sqrt, \
                      sin, cos, tan, atan2, abs, radians, degrees, constant pi). Use instead of \
                      mental arithmetic whenever an answer needs computation.",
    },
];

/// An ordered set of tool specs. The standard registry holds every tool;
/// [`ToolRegistry::subset`] narrows it to what a dispatcher selected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolRegistry {
    specs: Vec<ToolSpec>,
}

impl ToolRegistry {
    pub fn standard() -> Self {
        ToolRegistry { specs: STANDARD.to_vec() }
    }

    pub fn specs(&self) -> &[ToolSpec] {
        &self.specs
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.specs.iter().map(|s| s.name).collect()
    }

    /// Looks a tool up by canonical name or alias, case-insensitively.
    pub fn get(&self, name: &str) -> Option<&ToolSpec> {
        self.specs.iter().find(|s| s.matches(name))
    }

    /// Keeps only the named tools, preserving standard order and dropping
    /// unknown names. An empty result is allowed; the planner then has only
    /// its own reasoning to work with.
    pub fn subset(&self, names: &[impl AsRef<str>]) -> ToolRegistry {
        let specs = self
            .specs
            .iter()
            .filter(|s| names.iter().any(|n| s.matches(n.as_ref())))
            .cloned()
            .collect();
        ToolRegistry { specs }
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    /// Tool list for a prompt: one `- Name(params): description` line each.
    pub fn descriptions_text(&self) -> String {
        let mut out = String::new();
        for spec in &self.specs {
            let params: Vec<String> = spec
                .params
                .iter()
                .map(|p| {
                    if p.required {
                        p.name.to_string()
                    } else {
                        format!("{}?", p.name)
                    }
                })
                .collect();
            out.push_str(&format!(
                "- {}({}): {}\n",
                spec.name,
                params.join(", "),
                spec.description
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn standard_registry_has_unique_names_and_aliases() {
        let reg = ToolRegistry::standard();
        assert_eq!(reg.len(), 8);
        let mut seen: alloc::collections::BTreeSet<String> = alloc::collections::BTreeSet::new();
        for spec in reg.specs() {
            assert!(seen.insert(spec.name.to_ascii_lowercase()), "dup {}", spec.name);
            for alias in spec.aliases {
                assert!(seen.insert(alias.to_ascii_lowercase()), "dup alias {alias}");
            }
        }
    }

    #[test]
    fn lookup_accepts_aliases_case_insensitively() {
        let reg = ToolRegistry::standard();
        assert_eq!(reg.get("crop_subfigure").unwrap().name, "Subfigure_Cropping");
        assert_eq!(reg.get("REGION_MAGNIFICATION").unwrap().name, "Region_Magnification");
        assert_eq!(reg.get("Numerical_Computation").unwrap().name, "Numerical_Computation");
        assert!(reg.get("time_travel").is_none());
    }

    #[test]
    fn subset_preserves_standard_order() {
        let reg = ToolRegistry::standard();
        let sub = reg.subset(&["eval_expression", "crop_subfigure", "unknown"]);
        assert_eq!(sub.names(), vec!["Subfigure_Cropping", "Numerical_Computation"]);
        let empty = reg.subset(&[] as &[&str]);
        assert!(empty.is_empty());
    }

    #[test]
    fn descriptions_list_every_tool_with_params() {
        let reg = ToolRegistry::standard();
        let text = reg.descriptions_text();
        for spec in reg.specs() {
            assert!(text.contains(spec.name));
        }
        assert!(text.contains("Region_Magnification(image, x_start?, x_end?, y_start?, y_end?, scale)"));
        assert_eq!(text.lines().count(), reg.len());
    }
}
