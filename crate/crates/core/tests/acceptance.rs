//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Criterion 9 needs several hours of search and only runs when
//! `FCCFOLD_EXTENDED=1`; otherwise it is reported as SKIPPED.
//! Positional arguments (criterion numbers) restrict the run.

use std::process::ExitCode;
use std::time::Instant;

use fccfold::conformation::Conformation;
use fccfold::energy::{hp_energy, ContactMatrix, EnergyModelId};
use fccfold::lattice::{lattice_rotations, Direction, LatticePoint, BASIS};
use fccfold::metrics::{format_percent, relative_improvement, rmsd, NativeStructure, LATTICE_SCALE};
use fccfold::moves::{
    apply_pull, crossover, diagonal_move, macro_mutation, pull_candidates, rotation, tilt_move, MacroGuidance, MacroParams,
};
use fccfold::oracle::{enumerate_saws, exact_optimum};
use fccfold::search::{derive_seed, Engine, GaConfig};
use fccfold::sequence::{benchmark, AminoAcid, HpClass, Sequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashSet;

type Check = fn() -> Result<String, String>;

// per-generation member keys, trace lines, random-walk count
type Recording = (Vec<Vec<u8>>, Vec<String>, u64);

fn main() -> ExitCode {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let extended = std::env::var("FCCFOLD_EXTENDED").is_ok_and(|v| v == "1");
    let criteria: [(u32, &str, Check); 10] = [
        (1, "MJ matrix fidelity", mj_fidelity),
        (2, "HP energy of HPHPPHPH with four H-H contacts", hp_four_contacts),
        (3, "relative improvement values", ri_values),
        (4, "GA vs exhaustive oracle on length-6 HP sequences", oracle_equivalence),
        (5, "move operator validity", move_validity),
        (6, "pull-move reversibility", pull_reversibility),
        (7, "engine invariants on 1ENH", engine_invariants),
        (8, "macro-mutation distance guard", macro_guard),
        (9, "MH vs MJ directionality on 1ENH and 1CTF", mh_vs_mj),
        (10, "RMSD against direct summation", rmsd_oracle),
    ];
    let mut failed = false;
    for (id, name, check) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        if id == 9 && !extended {
            println!("criterion {id} [{name}]: SKIPPED (extended run, set FCCFOLD_EXTENDED=1)");
            continue;
        }
        let t = Instant::now();
        let res = check();
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {id} [{name}]: PASS ({detail}; {secs:.1}s)"),
            Err(detail) => {
                failed = true;
                println!("criterion {id} [{name}]: FAIL ({detail}; {secs:.1}s)");
            }
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

// ------------------------------------------------------------------ helpers

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// Validity straight from the definition, independent of the library checks.
fn valid_chain(c: &Conformation, n: usize) -> bool {
    let pts = c.points();
    if pts.len() != n || c.directions().len() != n - 1 {
        return false;
    }
    let mut rebuilt = vec![pts[0]];
    for d in c.directions() {
        rebuilt.push(*rebuilt.last().unwrap() + BASIS[d.index()]);
    }
    let distinct: FxHashSet<_> = pts.iter().collect();
    rebuilt == pts && distinct.len() == n && pts.windows(2).all(|w| w[0].sq_dist(w[1]) == 2)
}

fn random_walk_chain(n: usize, rng: &mut ChaCha8Rng) -> Conformation {
    'outer: loop {
        let mut pts = vec![LatticePoint::ORIGIN];
        let mut seen = FxHashSet::default();
        seen.insert(LatticePoint::ORIGIN);
        while pts.len() < n {
            let last = *pts.last().unwrap();
            let free: Vec<LatticePoint> = BASIS.iter().map(|&b| last + b).filter(|p| !seen.contains(p)).collect();
            if free.is_empty() {
                continue 'outer;
            }
            let p = free[rng.gen_range(0..free.len())];
            seen.insert(p);
            pts.push(p);
        }
        return Conformation::from_points(pts).unwrap();
    }
}

fn random_sequence(n: usize, rng: &mut ChaCha8Rng) -> Sequence {
    let residues = (0..n).map(|_| AminoAcid::ALL[rng.gen_range(0..20)]).collect();
    Sequence::new("rand", residues).unwrap()
}

// --------------------------------------------------------------- criteria

fn mj_fidelity() -> Result<String, String> {
    let mj = ContactMatrix::mj();
    let table = include_str!("fixtures/mj_lower.txt");
    let mut entries = 0;
    for (i, line) in table.lines().enumerate() {
        let mut parts = line.split_whitespace();
        let row = AminoAcid::from_three_letter(parts.next().unwrap()).ok_or("unknown row label")?;
        ensure(row.index() == i, || format!("row {i} out of order"))?;
        for (j, v) in parts.enumerate() {
            let want: f64 = v.parse().map_err(|e| format!("{e}"))?;
            let got = mj.get(row, AminoAcid::ALL[j]);
            ensure(got == want, || format!("{}-{}: {got} != {want}", row.three_letter(), AminoAcid::ALL[j].three_letter()))?;
            entries += 1;
        }
    }
    ensure(entries == 210, || format!("{entries} entries"))?;
    for a in AminoAcid::ALL {
        for b in AminoAcid::ALL {
            ensure(mj.get(a, b) == mj.get(b, a), || format!("asymmetric at {a:?},{b:?}"))?;
        }
    }
    let get = |a: &str, b: &str| mj.get(AminoAcid::from_three_letter(a).unwrap(), AminoAcid::from_three_letter(b).unwrap());
    ensure(get("CYS", "CYS") == -1.06 && get("LYS", "GLU") == -0.97 && get("GLY", "GLY") == -0.38, || "spot values".into())?;
    Ok("210 entries exact, 400 ordered pairs symmetric".into())
}

fn hp_four_contacts() -> Result<String, String> {
    // H -> Gly, P -> Ser
    let seq = Sequence::from_codes("hphpphph", "GSGSSGSG").unwrap();
    let conf = Conformation::from_direction_string("abafddc").unwrap();
    let pts = conf.points();
    let h: Vec<usize> = (0..8).filter(|&i| seq.residues()[i].hp_class() == HpClass::H).collect();
    let mut contacts = 0;
    for (a, &i) in h.iter().enumerate() {
        for &j in &h[a + 1..] {
            if j >= i + 2 && pts[i].sq_dist(pts[j]) == 2 {
                contacts += 1;
            }
        }
    }
    ensure(contacts == 4, || format!("fixture has {contacts} H-H contacts"))?;
    let e = hp_energy(&conf, &seq);
    ensure(e == -4.0, || format!("energy {e}"))?;
    Ok("E = -4".into())
}

fn ri_values() -> Result<String, String> {
    let a = format_percent(relative_improvement(-33.60, -31.21).map_err(|e| e.to_string())?);
    let b = format_percent(relative_improvement(-35.67, -28.18).map_err(|e| e.to_string())?);
    ensure(a == "7.66%" && b == "26.58%", || format!("{a}, {b}"))?;
    Ok(format!("{a}, {b}"))
}

fn oracle_equivalence() -> Result<String, String> {
    let hp = ContactMatrix::hp();
    let seqs: Vec<Sequence> = (0..64u32)
        .map(|mask| {
            let codes: String = (0..6).map(|b| if mask >> b & 1 == 1 { 'G' } else { 'S' }).collect();
            Sequence::from_codes(codes.clone(), &codes).unwrap()
        })
        .collect();
    let optima: Vec<f64> = seqs.par_iter().map(|s| exact_optimum(s, &hp).unwrap().optimum).collect();
    let mut report = Vec::new();
    let mut violations = 0;
    let mut worst_hits = 64;
    for seed in [1u64, 2, 3] {
        let cfg = GaConfig { pop_size: 20, max_generations: Some(200), seed, ..GaConfig::default() };
        let results: Vec<f64> = seqs
            .par_iter()
            .map(|s| Engine::new(s, cfg.clone(), EnergyModelId::Hp).unwrap().run().unwrap().best_energy)
            .collect();
        let hits = results.iter().zip(&optima).filter(|(r, o)| r == o).count();
        violations += results.iter().zip(&optima).filter(|(r, o)| r < o).count();
        worst_hits = worst_hits.min(hits);
        report.push(format!("seed {seed}: {hits}/64"));
    }
    ensure(violations == 0, || format!("{violations} runs below the exact optimum"))?;
    ensure(worst_hits >= 62, || report.join(", "))?;
    Ok(format!("{}, 0 below optimum", report.join(", ")))
}

fn move_validity() -> Result<String, String> {
    const PER_OP: usize = 10_000;
    let lengths = [8usize, 20, 54];
    let ops = ["crossover", "rotation", "diagonal", "pull", "tilt", "macro"];
    let results: Vec<(usize, usize, usize)> = ops
        .par_iter()
        .enumerate()
        .map(|(k, &op)| {
            let mut rng = ChaCha8Rng::seed_from_u64(500 + k as u64);
            let (mut ok, mut bad) = (0, 0);
            for t in 0..PER_OP {
                let n = lengths[t % 3];
                let a = random_walk_chain(n, &mut rng);
                let outs: Vec<Conformation> = match op {
                    "crossover" => {
                        let b = random_walk_chain(n, &mut rng);
                        crossover(&a, &b, rng.gen_range(1..n)).map(|(x, y)| vec![x, y]).unwrap_or_default()
                    }
                    "rotation" => rotation(&a, rng.gen_range(1..n - 1), rng.gen_range(0..24)).into_iter().collect(),
                    "diagonal" => {
                        let pos = rng.gen_range(1..n - 1);
                        let target = a.points()[pos - 1] + BASIS[rng.gen_range(0..12)];
                        diagonal_move(&a, pos, target).into_iter().collect()
                    }
                    "pull" => {
                        let pos = rng.gen_range(0..n);
                        let cands = pull_candidates(&a, pos);
                        if cands.is_empty() {
                            Vec::new()
                        } else {
                            apply_pull(&a, &cands[rng.gen_range(0..cands.len())]).into_iter().collect()
                        }
                    }
                    "tilt" => tilt_move(&a, rng.gen_range(0..n - 1), Direction::new(rng.gen_range(0..12)).unwrap()).into_iter().collect(),
                    _ => {
                        let seq = random_sequence(n, &mut rng);
                        let guidance = if rng.gen_bool(0.5) { MacroGuidance::HydrophobicCore } else { MacroGuidance::Unguided };
                        let p = MacroParams { repeat: 5, p_polar: rng.gen_range(0.0..=1.0), guidance };
                        vec![macro_mutation(&a, &seq, &p, &mut rng).conformation]
                    }
                };
                for c in outs {
                    if valid_chain(&c, n) {
                        ok += 1;
                    } else {
                        bad += 1;
                    }
                }
            }
            (k, ok, bad)
        })
        .collect();
    let violations: usize = results.iter().map(|r| r.2).sum();
    let summary: Vec<String> = results.iter().map(|&(k, ok, _)| format!("{} {ok}", ops[k])).collect();
    ensure(violations == 0, || format!("{violations} invalid results"))?;
    Ok(format!("{PER_OP} applications each, valid outputs: {}", summary.join(", ")))
}

// Rotating a chain rotates its pull neighbourhood, so checking one walk per
// rotation class covers every walk. The equivariance itself is checked on
// every class up to length 5, and small lengths are also run unreduced.
fn pull_reversibility() -> Result<String, String> {
    fn reversible(a: &Conformation) -> (usize, usize) {
        let n = a.len();
        let (mut pulls, mut bad) = (0, 0);
        for pos in 0..n {
            for cand in pull_candidates(a, pos) {
                let b = apply_pull(a, &cand).unwrap();
                pulls += 1;
                let back = (0..n).filter(|&p| b.points()[p] != a.points()[p]).any(|p| {
                    pull_candidates(&b, p).iter().filter(|c| c.l == a.points()[p]).any(|c| apply_pull(&b, c).unwrap().points() == a.points())
                });
                if !back {
                    bad += 1;
                }
            }
        }
        (pulls, bad)
    }
    fn results_of(a: &Conformation) -> FxHashSet<Vec<LatticePoint>> {
        (0..a.len()).flat_map(|p| pull_candidates(a, p)).map(|c| apply_pull(a, &c).unwrap().points().to_vec()).collect()
    }
    let mut total = 0;
    let mut violations = 0;
    for n in 2..=6 {
        let walks = enumerate_saws(n, n > 4).map_err(|e| e.to_string())?;
        let counts: Vec<(usize, usize)> = walks.par_iter().map(|w| reversible(&Conformation::from_directions(w).unwrap())).collect();
        total += counts.iter().map(|c| c.0).sum::<usize>();
        violations += counts.iter().map(|c| c.1).sum::<usize>();
    }
    let mut broken = 0;
    for n in 2..=5 {
        for w in enumerate_saws(n, true).unwrap() {
            let a = Conformation::from_directions(&w).unwrap();
            let base = results_of(&a);
            for rot in lattice_rotations() {
                let ra = a.rotated(rot);
                let mapped: FxHashSet<Vec<LatticePoint>> = base.iter().map(|pts| pts.iter().map(|&p| rot.apply(p)).collect()).collect();
                if results_of(&ra) != mapped {
                    broken += 1;
                }
            }
        }
    }
    ensure(broken == 0, || format!("pull neighbourhood not rotation-equivariant in {broken} cases"))?;
    ensure(violations == 0, || format!("{violations} of {total} pulls have no inverse"))?;
    Ok(format!("{total} pulls checked, 0 without inverse"))
}

fn engine_invariants() -> Result<String, String> {
    let seq = benchmark("1ENH").unwrap();
    let cfg = GaConfig { max_generations: Some(100), seed: 2024, ..GaConfig::default() };
    let record = || -> Result<Recording, String> {
        let engine = Engine::new(&seq, cfg.clone(), EnergyModelId::Mh).map_err(|e| e.to_string())?;
        let mut snapshots = Vec::new();
        let mut problems = Vec::new();
        let mut last_best = f64::INFINITY;
        let result = engine
            .run_with(|pop| {
                if !pop.keys_unique() {
                    problems.push(format!("duplicates at generation {}", pop.generation));
                }
                if pop.best_energy > last_best {
                    problems.push(format!("best_ever rose at generation {}", pop.generation));
                }
                last_best = pop.best_energy;
                if pop.members.len() != cfg.pop_size || pop.members.iter().any(|m| !valid_chain(m, seq.len())) {
                    problems.push(format!("invalid member at generation {}", pop.generation));
                }
                snapshots.push(pop.members.iter().map(|m| m.canonical_key()).collect::<Vec<_>>().concat());
            })
            .map_err(|e| e.to_string())?;
        let trace: Vec<String> = result.trace.iter().map(|r| r.to_csv()).collect();
        snapshots.push(result.best.canonical_key());
        ensure(problems.is_empty(), || problems.join("; "))?;
        Ok((snapshots, trace, result.random_walks))
    };
    let (snap_a, trace_a, walks) = record()?;
    let (snap_b, trace_b, _) = record()?;
    ensure(snap_a == snap_b && trace_a == trace_b, || "two runs with the same seed diverged".into())?;
    Ok(format!("101 populations duplicate-free, best monotone, {walks} random walks, runs identical"))
}

fn macro_guard() -> Result<String, String> {
    let seq = benchmark("1ENH").unwrap();
    let h: Vec<bool> = seq.residues().iter().map(|a| a.is_hydrophobic()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let params = MacroParams::default();
    let (mut checked, mut violations) = (0, 0);
    for _ in 0..1000 {
        let start = random_walk_chain(seq.len(), &mut rng);
        let out = macro_mutation(&start, &seq, &params, &mut rng);
        // replay the accepted moves and recompute each centre from scratch
        let mut pts = start.points().to_vec();
        for step in &out.steps {
            if pts[step.residue] != step.from {
                return Err(format!("step log out of sync at residue {}", step.residue));
            }
            if h[step.residue] {
                let hs: Vec<[f64; 3]> = pts.iter().zip(&h).filter(|(_, &is_h)| is_h).map(|(p, _)| p.as_f64()).collect();
                let k = hs.len() as f64;
                let c = [0, 1, 2].map(|a| hs.iter().map(|p| p[a]).sum::<f64>() / k);
                let d2 = |p: LatticePoint| {
                    let q = p.as_f64();
                    (q[0] - c[0]).powi(2) + (q[1] - c[1]).powi(2) + (q[2] - c[2]).powi(2)
                };
                let lib = step.hcc.ok_or("H step without a recorded centre")?;
                ensure((lib.cx - c[0]).abs() + (lib.cy - c[1]).abs() + (lib.cz - c[2]).abs() < 1e-9, || {
                    format!("recorded centre {lib:?} differs from recomputed {c:?}")
                })?;
                checked += 1;
                if d2(step.to) > d2(step.from) + 1e-9 {
                    violations += 1;
                }
            }
            pts[step.residue] = step.to;
        }
        ensure(pts == out.conformation.points(), || "replay does not reproduce the result".into())?;
    }
    ensure(violations == 0, || format!("{violations} of {checked} H moves increased the distance"))?;
    ensure(checked > 0, || "no H moves were accepted".into())?;
    Ok(format!("1000 applications, {checked} H moves, 0 violations"))
}

fn mh_vs_mj() -> Result<String, String> {
    const RUNS: usize = 10;
    const SECONDS: f64 = 600.0;
    let mut lines = Vec::new();
    let mut better_somewhere = false;
    let mut much_worse = false;
    for id in ["1ENH", "1CTF"] {
        let seq = benchmark(id).unwrap();
        let mean = |model: EnergyModelId| -> f64 {
            let energies: Vec<f64> = (0..RUNS)
                .into_par_iter()
                .map(|i| {
                    let cfg = GaConfig { max_generations: None, max_seconds: Some(SECONDS), seed: derive_seed(2013, i), ..GaConfig::default() };
                    Engine::new(&seq, cfg, model).unwrap().run().unwrap().reported_energy
                })
                .collect();
            energies.iter().sum::<f64>() / RUNS as f64
        };
        let mh = mean(EnergyModelId::Mh);
        let mj = mean(EnergyModelId::Mj);
        better_somewhere |= mh < mj;
        much_worse |= mh - mj > 2.0;
        lines.push(format!("{id}: MH {mh:.2} vs MJ {mj:.2}"));
    }
    let detail = lines.join(", ");
    ensure(better_somewhere && !much_worse, || detail.clone())?;
    Ok(detail)
}

fn rmsd_oracle() -> Result<String, String> {
    // direct summation over ordered pairs, written independently
    fn direct(pred: &[[f64; 3]], native: &[[f64; 3]]) -> f64 {
        let n = pred.len();
        let norm = |a: [f64; 3], b: [f64; 3]| ((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2])).sqrt();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = norm(pred[i], pred[j]) - norm(native[i], native[j]);
                    acc += d * d;
                }
            }
        }
        (acc / (n * (n - 1)) as f64).sqrt()
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(5..=50);
        let pred = random_walk_chain(n, &mut rng);
        let native = NativeStructure {
            id: "rand".into(),
            ca_coords: (0..n).map(|_| [0; 3].map(|_| rng.gen_range(-20.0..20.0))).collect(),
        };
        let scaled: Vec<[f64; 3]> = pred.points().iter().map(|p| [p.x as f64 * LATTICE_SCALE, p.y as f64 * LATTICE_SCALE, p.z as f64 * LATTICE_SCALE]).collect();
        let want = direct(&scaled, &native.ca_coords);
        let got = rmsd(&pred, &native).map_err(|e| e.to_string())?;
        worst = worst.max(((got - want) / want).abs());
        let ident = rmsd(&pred, &NativeStructure::from_conformation("same", &pred)).unwrap();
        ensure(ident == 0.0, || format!("identity RMSD {ident}"))?;
    }
    ensure(worst <= 1e-9, || format!("relative error {worst:e}"))?;
    Ok(format!("100 pairs, worst relative error {worst:.1e}, identity exactly 0"))
}
