//! Precision, recall and F1 of an automatic summary against user summaries.
//!
//! A keyframe in the automatic summary matches a user keyframe when their
//! frame numbers differ by at most `window`. Matching is one-to-one and
//! greedy: candidate pairs are consumed in increasing distance, then by the
//! earlier frame.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default matching radius in frames (about half a second at 30 fps).
pub const DEFAULT_WINDOW: u64 = 15;

/// Keyframe set of one video: strictly increasing original frame numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSummary")]
pub struct Summary {
    video: String,
    frame_indices: Vec<u64>,
}

#[derive(Deserialize)]
struct RawSummary {
    video: String,
    frame_indices: Vec<u64>,
}

impl TryFrom<RawSummary> for Summary {
    type Error = Error;

    fn try_from(raw: RawSummary) -> Result<Self> {
        Summary::new(raw.video, raw.frame_indices)
    }
}

impl Summary {
    pub fn new(video: impl Into<String>, frame_indices: Vec<u64>) -> Result<Self> {
        let video = video.into();
        if let Some(w) = frame_indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Summary(format!(
                "{video}: frame indices must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self {
            video,
            frame_indices,
        })
    }

    pub fn video(&self) -> &str {
        &self.video
    }

    pub fn frames(&self) -> &[u64] {
        &self.frame_indices
    }

    pub fn len(&self) -> usize {
        self.frame_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame_indices.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchConfig {
    pub window: u64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
        }
    }
}

/// Size of the greedy one-to-one matching between `a` and `u`.
pub fn match_count(a: &Summary, u: &Summary, cfg: &MatchConfig) -> usize {
    let (af, uf) = (a.frames(), u.frames());
    // (distance, earlier frame, later frame, index in a, index in u)
    let mut pairs = Vec::new();
    let mut lo = 0;
    for (i, &x) in af.iter().enumerate() {
        while lo < uf.len() && uf[lo].saturating_add(cfg.window) < x {
            lo += 1;
        }
        for (j, &y) in uf.iter().enumerate().skip(lo) {
            if y > x.saturating_add(cfg.window) {
                break;
            }
            pairs.push((x.abs_diff(y), x.min(y), x.max(y), i, j));
        }
    }
    pairs.sort_unstable();

    let mut used_a = vec![false; af.len()];
    let mut used_u = vec![false; uf.len()];
    let mut count = 0;
    for (_, _, _, i, j) in pairs {
        if !used_a[i] && !used_u[j] {
            used_a[i] = true;
            used_u[j] = true;
            count += 1;
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    fn from_counts(matched: usize, auto: usize, user: usize) -> Self {
        let precision = if auto == 0 {
            0.0
        } else {
            matched as f64 / auto as f64
        };
        let recall = if user == 0 {
            0.0
        } else {
            matched as f64 / user as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            precision,
            recall,
            f1,
        }
    }

    fn mean<'a>(items: impl ExactSizeIterator<Item = &'a Prf>) -> Self {
        let n = items.len() as f64;
        let (p, r, f) = items.fold((0.0, 0.0, 0.0), |(p, r, f), x| {
            (p + x.precision, r + x.recall, f + x.f1)
        });
        Self {
            precision: p / n,
            recall: r / n,
            f1: f / n,
        }
    }
}

pub fn prf(a: &Summary, u: &Summary, cfg: &MatchConfig) -> Prf {
    Prf::from_counts(match_count(a, u, cfg), a.len(), u.len())
}

/// Per-user scores of one video.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VideoScores {
    pub video: String,
    pub users: Vec<Prf>,
}

/// Scores `auto` against every user summary of the same video.
pub fn score_video(auto: &Summary, users: &[Summary], cfg: &MatchConfig) -> Result<VideoScores> {
    if users.is_empty() {
        return Err(Error::Summary(format!(
            "{}: no user summaries",
            auto.video()
        )));
    }
    if let Some(u) = users.iter().find(|u| u.video() != auto.video()) {
        return Err(Error::Summary(format!(
            "user summary for '{}' paired with automatic summary for '{}'",
            u.video(),
            auto.video()
        )));
    }
    Ok(VideoScores {
        video: auto.video().to_owned(),
        users: users.iter().map(|u| prf(auto, u, cfg)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VideoReport {
    pub video: String,
    pub users: Vec<Prf>,
    pub mean: Prf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub videos: Vec<VideoReport>,
    pub mean: Prf,
}

/// Means over users per video, then an unweighted mean over videos.
pub fn aggregate_report(videos: Vec<VideoScores>) -> Result<EvalReport> {
    if videos.is_empty() {
        return Err(Error::Summary("empty dataset".into()));
    }
    let videos = videos
        .into_iter()
        .map(|v| {
            if v.users.is_empty() {
                return Err(Error::Summary(format!("{}: no user scores", v.video)));
            }
            let mean = Prf::mean(v.users.iter());
            Ok(VideoReport {
                video: v.video,
                users: v.users,
                mean,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = Prf::mean(videos.iter().map(|v| &v.mean));
    Ok(EvalReport { videos, mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn s(frames: &[u64]) -> Summary {
        Summary::new("v", frames.to_vec()).unwrap()
    }

    #[test]
    fn summary_must_be_strictly_increasing() {
        assert!(Summary::new("v", vec![3, 3]).is_err());
        assert!(Summary::new("v", vec![5, 2]).is_err());
        assert!(Summary::new("v", vec![]).is_ok());
    }

    #[test]
    fn summary_json_is_validated() {
        let ok: Summary = serde_json::from_str(r#"{"video":"v1","frame_indices":[1,5]}"#).unwrap();
        assert_eq!(ok.frames(), &[1, 5]);
        assert!(
            serde_json::from_str::<Summary>(r#"{"video":"v1","frame_indices":[5,1]}"#).is_err()
        );
    }

    #[test]
    fn match_examples() {
        let cfg = MatchConfig::default();
        let a = s(&[3, 40, 77, 300]);
        assert_eq!(match_count(&a, &a, &cfg), 4);
        assert_eq!(match_count(&s(&[10, 50, 90]), &s(&[12, 200]), &cfg), 1);
        assert_eq!(
            match_count(&s(&[10, 12]), &s(&[11]), &MatchConfig { window: 2 }),
            1
        );
    }

    #[test]
    fn tie_goes_to_earlier_frame() {
        // With 11 taken by 10, 12 can still reach 13.
        let cfg = MatchConfig { window: 1 };
        assert_eq!(match_count(&s(&[10, 12]), &s(&[11, 13]), &cfg), 2);
        assert_eq!(match_count(&s(&[10, 12]), &s(&[11]), &cfg), 1);
    }

    #[test]
    fn prf_examples() {
        let cfg = MatchConfig::default();
        let a = s(&[1, 2, 3, 4, 5]);
        assert_eq!(
            prf(&a, &a, &cfg),
            Prf {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0
            }
        );
        let r = prf(&s(&[10, 50, 90]), &s(&[12, 200]), &cfg);
        assert_abs_diff_eq!(r.precision, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.recall, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.f1, 0.4, epsilon = 1e-15);
        assert_eq!(prf(&s(&[]), &s(&[4]), &cfg), Prf::default());
        assert_eq!(prf(&s(&[4]), &s(&[]), &cfg), Prf::default());
    }

    fn user(f1: f64) -> Prf {
        Prf {
            precision: f1,
            recall: f1,
            f1,
        }
    }

    #[test]
    fn aggregation_examples() {
        let r = aggregate_report(vec![VideoScores {
            video: "a".into(),
            users: vec![user(0.4), user(0.6)],
        }])
        .unwrap();
        assert_abs_diff_eq!(r.videos[0].mean.f1, 0.5, epsilon = 1e-15);

        let r = aggregate_report(vec![
            VideoScores {
                video: "a".into(),
                users: vec![user(0.5)],
            },
            VideoScores {
                video: "b".into(),
                users: vec![user(1.0)],
            },
        ])
        .unwrap();
        assert_abs_diff_eq!(r.mean.f1, 0.75, epsilon = 1e-15);

        let five = VideoScores {
            video: "a".into(),
            users: (1..=5).map(|u| user(u as f64 / 10.0)).collect(),
        };
        let r = aggregate_report(vec![five]).unwrap();
        assert_eq!(r.videos[0].users.len(), 5);
        assert_abs_diff_eq!(r.videos[0].mean.f1, 0.3, epsilon = 1e-15);

        assert!(aggregate_report(vec![]).is_err());
        assert!(aggregate_report(vec![VideoScores {
            video: "a".into(),
            users: vec![]
        }])
        .is_err());
    }

    #[test]
    fn score_video_checks_ids() {
        let cfg = MatchConfig::default();
        let a = s(&[1]);
        let other = Summary::new("w", vec![1]).unwrap();
        assert!(score_video(&a, &[other], &cfg).is_err());
        assert!(score_video(&a, &[], &cfg).is_err());
        assert_eq!(score_video(&a, &[s(&[1])], &cfg).unwrap().users[0].f1, 1.0);
    }
}
