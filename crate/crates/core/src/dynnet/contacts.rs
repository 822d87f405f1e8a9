use std::io::Read;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Contact, DynNetError, DynamicNetwork};
use crate::rng::{self, tag};

/// Reads a `t,u,v,distance` contact CSV (an optional header line is skipped).
///
/// With a stride `h`, only time points `t` with `t % h == 0` are kept and
/// renumbered to `t / h`. Contacts beyond `cutoff` meters are dropped when
/// a cutoff is given.
pub fn ingest_contacts(path: &Path, stride: usize, cutoff: Option<f64>) -> crate::Result<DynamicNetwork> {
    let file = std::fs::File::open(path)?;
    Ok(read_contacts(file, stride, cutoff)?)
}

pub fn read_contacts(reader: impl Read, stride: usize, cutoff: Option<f64>) -> Result<DynamicNetwork, DynNetError> {
    if stride == 0 {
        return Err(DynNetError::ZeroStride);
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut contacts = Vec::new();
    let mut max_t = None::<usize>;
    let mut max_id = None::<usize>;
    for (i, record) in rdr.records().enumerate() {
        let line = i as u64 + 1;
        let record = record.map_err(|e| DynNetError::Parse { line, message: e.to_string() })?;
        if i == 0 && record.get(0).is_some_and(|f| f.parse::<usize>().is_err()) {
            continue;
        }
        if record.len() != 4 {
            return Err(DynNetError::Parse { line, message: format!("expected 4 fields, found {}", record.len()) });
        }
        let int = |k: usize, name: &str| {
            record[k]
                .parse::<usize>()
                .map_err(|_| DynNetError::Parse { line, message: format!("{name} `{}` is not a non-negative integer", &record[k]) })
        };
        let (t, u, v) = (int(0, "time")?, int(1, "individual")?, int(2, "individual")?);
        let distance: f64 = record[3]
            .parse()
            .map_err(|_| DynNetError::Parse { line, message: format!("distance `{}` is not a number", &record[3]) })?;
        if distance < 0.0 {
            return Err(DynNetError::NegativeDistance { line, distance });
        }
        if !distance.is_finite() {
            return Err(DynNetError::Parse { line, message: "distance must be finite".into() });
        }
        max_t = max_t.max(Some(t));
        max_id = max_id.max(Some(u.max(v)));
        if t % stride == 0 && cutoff.is_none_or(|eps| distance <= eps) {
            contacts.push(Contact { t: t / stride, u, v, distance });
        }
    }
    let individuals = max_id.map_or(0, |m| m + 1);
    let time_points = max_t.map_or(0, |m| m / stride + 1);
    DynamicNetwork::new(individuals, time_points, contacts)
}

/// Random-walk mobility in a square arena.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilityParams {
    /// Side length of the arena in meters.
    pub arena: f64,
    /// Largest per-coordinate displacement per time step.
    pub step: f64,
    /// Pairs within this distance are recorded as contacts.
    pub contact_radius: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self { arena: 160.0, step: 10.0, contact_radius: 20.0 }
    }
}

fn reflect(x: f64, side: f64) -> f64 {
    if side <= 0.0 {
        return 0.0;
    }
    let period = 2.0 * side;
    let r = x.rem_euclid(period);
    if r > side {
        period - r
    } else {
        r
    }
}

/// Contacts among walkers with the given positions per time step.
pub fn contacts_from_walk(positions: &[Vec<(f64, f64)>], contact_radius: f64) -> DynamicNetwork {
    let individuals = positions.first().map_or(0, Vec::len);
    let mut contacts = Vec::new();
    for (t, layer) in positions.iter().enumerate() {
        for u in 0..individuals {
            for v in (u + 1)..individuals {
                let d = (layer[u].0 - layer[v].0).hypot(layer[u].1 - layer[v].1);
                if d <= contact_radius {
                    contacts.push(Contact { t, u, v, distance: d });
                }
            }
        }
    }
    DynamicNetwork::new(individuals, positions.len(), contacts).expect("walk contacts are well formed")
}

/// Seeded random walk of `individuals` walkers over `time_points` steps.
pub fn synth_contacts(individuals: usize, time_points: usize, params: &MobilityParams, seed: u64) -> DynamicNetwork {
    let mut rng = rng::stream(seed, &[tag::CONTACTS]);
    let side = params.arena.max(0.0);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng, lo: f64, hi: f64| if lo < hi { rng.random_range(lo..hi) } else { lo };
    let mut pos: Vec<(f64, f64)> = (0..individuals).map(|_| (draw(&mut rng, 0.0, side), draw(&mut rng, 0.0, side))).collect();
    let mut positions = Vec::with_capacity(time_points);
    for _ in 0..time_points {
        positions.push(pos.clone());
        for p in pos.iter_mut() {
            let dx = draw(&mut rng, -params.step, params.step);
            let dy = draw(&mut rng, -params.step, params.step);
            *p = (reflect(p.0 + dx, side), reflect(p.1 + dy, side));
        }
    }
    contacts_from_walk(&positions, params.contact_radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_toy_file() {
        let text = "t,u,v,distance\n0,0,1,3.5\n1,2,1,0\n2,0,2,12\n";
        let net = read_contacts(text.as_bytes(), 1, None).unwrap();
        assert_eq!(net.contacts().len(), 3);
        assert_eq!(net.individuals(), 3);
        assert_eq!(net.time_points(), 3);
        assert_eq!(net.contacts()[1], Contact { t: 1, u: 1, v: 2, distance: 0.0 });
        assert_eq!(read_contacts(text.as_bytes(), 1, Some(10.0)).unwrap().contacts().len(), 2);
    }

    #[test]
    fn empty_file_is_empty_network() {
        let net = read_contacts("".as_bytes(), 1, None).unwrap();
        assert_eq!((net.individuals(), net.time_points(), net.contacts().len()), (0, 0, 0));
    }

    #[test]
    fn stride_keeps_every_hth_time_point() {
        let text: String = (0..576).map(|t| format!("{t},0,1,1.0\n")).collect();
        let net = read_contacts(text.as_bytes(), 12, None).unwrap();
        assert_eq!(net.time_points(), 48);
        assert_eq!(net.contacts().len(), 48);
        assert_eq!(net.contacts()[3].t, 3);
    }

    #[test]
    fn reports_line_numbers() {
        let err = read_contacts("0,0,1,1\n1,0,x,2\n".as_bytes(), 1, None).unwrap_err();
        assert!(matches!(err, DynNetError::Parse { line: 2, .. }), "{err:?}");
        let err = read_contacts("t,u,v,d\n0,0,1,1\n1,0,1,-2\n".as_bytes(), 1, None).unwrap_err();
        assert_eq!(err, DynNetError::NegativeDistance { line: 3, distance: -2.0 });
        let err = read_contacts("0,0,1\n".as_bytes(), 1, None).unwrap_err();
        assert!(matches!(err, DynNetError::Parse { line: 1, .. }));
        assert_eq!(read_contacts("".as_bytes(), 0, None).unwrap_err(), DynNetError::ZeroStride);
    }

    #[test]
    fn ingest_from_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("contacts.csv");
        std::fs::write(&path, "0,0,1,3\n").unwrap();
        assert_eq!(ingest_contacts(&path, 1, None).unwrap().contacts().len(), 1);
        assert!(ingest_contacts(&dir.path().join("missing.csv"), 1, None).is_err());
    }

    #[test]
    fn pinned_walkers_always_touch() {
        let params = MobilityParams { arena: 0.0, step: 0.0, contact_radius: 20.0 };
        let net = synth_contacts(2, 7, &params, 1);
        assert_eq!(net.contacts().len(), 7);
        assert!(net.contacts().iter().all(|c| c.distance == 0.0));
    }

    #[test]
    fn distant_walkers_never_touch() {
        let positions = vec![vec![(0.0, 0.0), (1000.0, 1000.0)]; 5];
        assert!(contacts_from_walk(&positions, 20.0).contacts().is_empty());
    }

    #[test]
    fn walk_is_reproducible() {
        let params = MobilityParams::default();
        let a = synth_contacts(40, 24, &params, 9);
        assert_eq!(a, synth_contacts(40, 24, &params, 9));
        assert_ne!(a, synth_contacts(40, 24, &params, 10));
        assert!(a.contacts().iter().all(|c| c.distance <= 20.0));
        assert!(!a.contacts().is_empty());
    }

    #[test]
    fn reflection_stays_inside() {
        for x in [-130.0, -5.0, 0.0, 50.0, 100.0, 105.0, 260.0] {
            let r = reflect(x, 100.0);
            assert!((0.0..=100.0).contains(&r), "{x} -> {r}");
        }
        assert_eq!(reflect(105.0, 100.0), 95.0);
        assert_eq!(reflect(-5.0, 100.0), 5.0);
    }
}
