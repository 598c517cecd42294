//! Built-in knot groups.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::presentation::{parse_presentation, Presentation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
}

pub fn entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "trefoil",
            description: "Wirtinger presentation <x,y | xyxy^-1x^-1y^-1>, h = (1,1)",
        },
        CatalogEntry {
            name: "torus:p,q",
            description: "torus knot group <a,b | a^p b^-q>, h = (q,p), p and q coprime",
        },
        CatalogEntry {
            name: "fig8",
            description: "figure-eight knot, 2-bridge presentation (control knot)",
        },
    ]
}

pub const TREFOIL: &str = "gens x y; rel x y x Y X Y;";
pub const FIGURE_EIGHT: &str = "gens x y; rel x Y X y x Y x y X Y;";

/// `<a,b | a^p b^-q>` with weights `(q, p)`.
pub fn torus_knot(p: u32, q: u32) -> Result<Presentation> {
    if p < 2 || q < 2 {
        return Err(Error::UnknownKnot(format!("torus:{p},{q} needs p, q >= 2")));
    }
    if p.gcd(&q) != 1 {
        return Err(Error::UnknownKnot(format!(
            "torus:{p},{q} is not a knot (gcd {})",
            p.gcd(&q)
        )));
    }
    let rel = format!("{}{}", "a".repeat(p as usize), "B".repeat(q as usize));
    parse_presentation(&format!("gens a b; rel {rel}; weights {q} {p};"))
}

/// Resolves `trefoil`, `fig8` or `torus:p,q`.
pub fn lookup(name: &str) -> Result<Presentation> {
    match name.trim() {
        "trefoil" => parse_presentation(TREFOIL),
        "fig8" | "figure-eight" => parse_presentation(FIGURE_EIGHT),
        other => {
            let Some(rest) = other.strip_prefix("torus:") else {
                return Err(Error::UnknownKnot(other.to_string()));
            };
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            let parsed: Vec<u32> = parts.iter().filter_map(|s| s.parse().ok()).collect();
            if parts.len() != 2 || parsed.len() != 2 {
                return Err(Error::UnknownKnot(other.to_string()));
            }
            torus_knot(parsed[0], parsed[1])
        }
    }
}
