use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::PipelineError;

pub const N_GENRES: usize = 32;

/// The most frequent genre tags and their placement on the prior's circle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenreVocabulary {
    /// Ordered by descending frequency; index = genre id.
    pub tags: Vec<String>,
    /// `circle_order[genre_id]` = mixture component index.
    pub circle_order: Vec<usize>,
}

impl GenreVocabulary {
    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn id_of(&self, tag: &str) -> Option<u16> {
        self.tags.iter().position(|t| t == tag).map(|i| i as u16)
    }

    pub fn component_of(&self, genre_id: u16) -> Option<usize> {
        self.circle_order.get(genre_id as usize).copied()
    }

    /// Sorted, de-duplicated genre ids for a song's tag list.
    pub fn ids_for(&self, tags: &[String]) -> Vec<u16> {
        let mut ids: Vec<u16> = tags.iter().filter_map(|t| self.id_of(t)).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

pub fn count_tags<'a>(tag_lists: impl IntoIterator<Item = &'a Vec<String>>) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    for tags in tag_lists {
        for t in tags {
            *counts.entry(t.clone()).or_insert(0) += 1;
        }
    }
    counts
}

/// Selects the `N_GENRES` most frequent tags (ties broken lexicographically).
///
/// `circle` lists the selected tags in the order they should occupy the
/// mixture components; without it, components follow frequency order.
pub fn build_genre_vocabulary(
    counts: &HashMap<String, usize>,
    circle: Option<&[String]>,
) -> Result<GenreVocabulary, PipelineError> {
    if counts.len() < N_GENRES {
        return Err(PipelineError::Config(format!(
            "corpus metadata has {} distinct genre tags, at least {N_GENRES} are required",
            counts.len()
        )));
    }
    let mut ranked: Vec<(&String, usize)> = counts.iter().map(|(t, &c)| (t, c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let tags: Vec<String> = ranked.into_iter().take(N_GENRES).map(|(t, _)| t.clone()).collect();

    let circle_order = match circle {
        None => (0..N_GENRES).collect(),
        Some(order) => {
            if order.len() != N_GENRES {
                return Err(PipelineError::Config(format!(
                    "circle order lists {} tags, expected {N_GENRES}",
                    order.len()
                )));
            }
            let position: BTreeMap<&str, usize> = order.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
            if position.len() != N_GENRES {
                return Err(PipelineError::Config("circle order contains duplicate tags".into()));
            }
            tags.iter()
                .map(|t| {
                    position
                        .get(t.as_str())
                        .copied()
                        .ok_or_else(|| PipelineError::Config(format!("selected tag {t:?} missing from circle order")))
                })
                .collect::<Result<_, _>>()?
        }
    };
    Ok(GenreVocabulary { tags, circle_order })
}
