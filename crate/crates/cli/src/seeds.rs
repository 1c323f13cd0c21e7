//! Seed JSON shared by the CLI and the HTTP service:
//! `{"fg": [[x, y], ...], "bg": [[x, y], ...], "box": [x0, y0, x1, y1]}`.

use serde::{Deserialize, Serialize};
use spmrf::seg::Seeds;
use spmrf::GridGeometry;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedsJson {
    #[serde(default)]
    pub fg: Vec<[i64; 2]>,
    #[serde(default)]
    pub bg: Vec<[i64; 2]>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub bbox: Option<[i64; 4]>,
}

impl SeedsJson {
    pub fn parse(text: &[u8]) -> Result<Self, String> {
        serde_json::from_slice(text).map_err(|e| format!("malformed seeds JSON: {e}"))
    }

    pub fn is_empty(&self) -> bool {
        self.fg.is_empty() && self.bg.is_empty() && self.bbox.is_none()
    }

    pub fn to_seeds(&self, geometry: GridGeometry) -> spmrf::Result<Seeds> {
        Seeds::from_coords(geometry, &self.fg, &self.bg, self.bbox)
    }

    pub fn from_seeds(seeds: &Seeds, geometry: GridGeometry) -> Self {
        let coords = |set: &std::collections::BTreeSet<usize>| {
            set.iter()
                .map(|&p| {
                    let (x, y) = geometry.coords(p);
                    [x as i64, y as i64]
                })
                .collect()
        };
        Self {
            fg: coords(&seeds.fg),
            bg: coords(&seeds.bg),
            bbox: seeds.bbox.map(|b| [b.x0 as i64, b.y0 as i64, b.x1 as i64, b.y1 as i64]),
        }
    }
}
