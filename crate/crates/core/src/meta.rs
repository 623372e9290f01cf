//! Parallel simulation: runs A_0, A_1, ... at confidences δ/2^{k+1}, where A_k
//! is resumed at every time slot divisible by 2^k and consumes one sample per
//! resume. The first answer wins.
//!
//! A batch request of s samples at resume R is drawn at once and then fed one
//! sample per resume, so the next computation of that run happens at resume
//! R + s. The event-driven loop below jumps straight between computations.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::model::{derive_seed, EmpiricalMeans, GaussianEnvironment, MeanProfile};
use crate::run::{ResumableRun, RunFailure, Step};

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationOutcome<A> {
    pub result: std::result::Result<A, RunFailure>,
    /// Index k of the run whose answer was returned.
    pub winner: Option<usize>,
    /// Samples consumed by each started run when the simulation stopped.
    pub per_run_pulls: Vec<u64>,
    pub total_pulls: u64,
    /// Slot at which the simulation stopped.
    pub final_slot: u128,
    /// Rounds completed by the winning run.
    pub rounds: usize,
}

struct Slot<R> {
    run: R,
    env: GaussianEnvironment,
    pending: Option<EmpiricalMeans>,
    /// Resume index of the next computation.
    next_compute: u128,
    /// Set once the run stops: the resume index at which it did.
    stopped_at: Option<u128>,
}

fn confidence(delta: f64, k: usize) -> f64 {
    delta / 2f64.powi(k as i32 + 1)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("delta must lie in (0,1), got {delta}")))
    }
}

/// Compute step: resume until the run asks for a nonempty batch or stops.
fn compute<R: ResumableRun>(s: &mut Slot<R>) -> Step<R::Answer> {
    loop {
        match s.run.resume(s.pending.take()) {
            Step::Sample(counts) => {
                let need: u64 = counts.iter().sum();
                s.pending = Some(s.env.sample(&counts));
                if need > 0 {
                    return Step::Sample(counts);
                }
            }
            other => return other,
        }
    }
}

/// Samples consumed by run k at slot `t`, given which run stopped the simulation.
fn consumed<R>(s: &Slot<R>, k: usize, t: u128, winner: usize) -> u64 {
    if let Some(r) = s.stopped_at {
        return (r - 1) as u64;
    }
    let period = 1u128 << k;
    let mut resumes = t / period;
    if t.is_multiple_of(period) && k > winner {
        resumes -= 1;
    }
    resumes as u64
}

fn pull_total<R>(slots: &[Slot<R>], t: u128, k: usize) -> u64 {
    slots.iter().enumerate().map(|(j, s)| consumed(s, j, t, k)).sum()
}

/// Run the parallel simulation. `factory(delta_k)` builds A_k; A_k samples
/// from its own environment seeded with `derive_seed(seed, k)`.
pub fn parallel_simulate<R, F>(
    mut factory: F,
    profile: &MeanProfile,
    delta: f64,
    seed: u64,
    pull_cap: u64,
) -> Result<SimulationOutcome<R::Answer>>
where
    R: ResumableRun,
    F: FnMut(f64) -> Result<R>,
{
    check_delta(delta)?;
    let mut slots: Vec<Slot<R>> = Vec::new();
    // (slot, k); a k equal to slots.len() means "start A_k"
    let mut events: BinaryHeap<Reverse<(u128, usize)>> = BinaryHeap::new();
    events.push(Reverse((1, 0)));
    while let Some(Reverse((t, k))) = events.pop() {
        if k == slots.len() {
            slots.push(Slot {
                run: factory(confidence(delta, k))?,
                env: GaussianEnvironment::new(profile.clone(), derive_seed(seed, k as u64)),
                pending: None,
                next_compute: 1,
                stopped_at: None,
            });
            if k + 1 < 127 {
                events.push(Reverse((1u128 << (k + 1), k + 1)));
            }
        }
        let total = pull_total(&slots, t, k);
        if total > pull_cap {
            return Ok(SimulationOutcome {
                result: Err(RunFailure::PullCap(pull_cap)),
                winner: None,
                per_run_pulls: slots.iter().enumerate().map(|(j, s)| consumed(s, j, t, k)).collect(),
                total_pulls: total,
                final_slot: t,
                rounds: 0,
            });
        }
        let s = &mut slots[k];
        let r = s.next_compute;
        match compute(s) {
            Step::Sample(counts) => {
                s.next_compute = r + counts.iter().map(|&c| c as u128).sum::<u128>();
                events.push(Reverse((s.next_compute << k, k)));
            }
            Step::Done(answer) => {
                s.stopped_at = Some(r);
                let rounds = s.run.rounds();
                let per_run_pulls: Vec<u64> = slots.iter().enumerate().map(|(j, s)| consumed(s, j, t, k)).collect();
                return Ok(SimulationOutcome {
                    result: Ok(answer),
                    winner: Some(k),
                    total_pulls: per_run_pulls.iter().sum(),
                    per_run_pulls,
                    final_slot: t,
                    rounds,
                });
            }
            Step::Failed(_) => s.stopped_at = Some(r),
        }
    }
    unreachable!("the start events never run out")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BestSetInstance;
    use crate::naive::NaiveGapElim;

    /// Literal slot-by-slot scheduler used as an oracle for the event-driven loop.
    #[allow(clippy::type_complexity)]
    fn reference<R: ResumableRun, F: FnMut(f64) -> Result<R>>(
        mut factory: F,
        profile: &MeanProfile,
        delta: f64,
        seed: u64,
        max_slot: u128,
    ) -> (Option<(usize, R::Answer)>, Vec<u64>, u128, Vec<u128>) {
        struct Ref<R> {
            run: R,
            env: GaussianEnvironment,
            pending: Option<EmpiricalMeans>,
            remaining: u64,
            consumed: u64,
            resumes: u128,
            dead: bool,
        }
        let mut runs: Vec<Ref<R>> = Vec::new();
        for t in 1..=max_slot {
            let mut k = 0;
            while t % (1u128 << k) == 0 {
                if k == runs.len() {
                    runs.push(Ref {
                        run: factory(confidence(delta, k)).unwrap(),
                        env: GaussianEnvironment::new(profile.clone(), derive_seed(seed, k as u64)),
                        pending: None,
                        remaining: 0,
                        consumed: 0,
                        resumes: 0,
                        dead: false,
                    });
                }
                let r = &mut runs[k];
                r.resumes += 1;
                if !r.dead {
                    while r.remaining == 0 {
                        match r.run.resume(r.pending.take()) {
                            Step::Sample(c) => {
                                r.pending = Some(r.env.sample(&c));
                                r.remaining = c.iter().sum();
                            }
                            Step::Done(a) => {
                                let pulls = runs.iter().map(|r| r.consumed).collect();
                                let resumes = runs.iter().map(|r| r.resumes).collect();
                                return (Some((k, a)), pulls, t, resumes);
                            }
                            Step::Failed(_) => {
                                r.dead = true;
                                break;
                            }
                        }
                    }
                    if !r.dead {
                        r.remaining -= 1;
                        r.consumed += 1;
                    }
                }
                k += 1;
            }
        }
        let pulls = runs.iter().map(|r| r.consumed).collect();
        let resumes = runs.iter().map(|r| r.resumes).collect();
        (None, pulls, max_slot, resumes)
    }

    /// Scripted run: a fixed list of batch sizes, then an outcome.
    #[derive(Clone, Debug)]
    struct Scripted {
        batches: Vec<u64>,
        succeed: bool,
        at: usize,
        answer: u32,
    }

    impl ResumableRun for Scripted {
        type Answer = u32;

        fn resume(&mut self, _: Option<EmpiricalMeans>) -> Step<u32> {
            if self.at < self.batches.len() {
                self.at += 1;
                return Step::Sample(vec![self.batches[self.at - 1], 0]);
            }
            if self.succeed {
                Step::Done(self.answer)
            } else {
                Step::Failed(RunFailure::VerificationFailed)
            }
        }

        fn rounds(&self) -> usize {
            self.at
        }
    }

    fn profile() -> MeanProfile {
        MeanProfile::new(vec![0.5, 0.0]).unwrap()
    }

    fn scripted(plans: Vec<(Vec<u64>, bool)>) -> impl FnMut(f64) -> Result<Scripted> {
        let mut k = 0;
        move |_| {
            let (batches, succeed) = plans.get(k).cloned().unwrap_or((vec![1000], true));
            k += 1;
            Ok(Scripted { batches, succeed, at: 0, answer: k as u32 - 1 })
        }
    }

    #[test]
    fn immediate_answer_costs_nothing() {
        let out = parallel_simulate(scripted(vec![(vec![], true)]), &profile(), 0.01, 0, u64::MAX).unwrap();
        assert_eq!(out.result, Ok(0));
        assert_eq!(out.final_slot, 1);
        assert_eq!(out.total_pulls, 0);
        assert_eq!(out.per_run_pulls, vec![0]);
    }

    #[test]
    fn first_run_with_a_batch() {
        // A_0 asks for 5 samples: it answers at slot 6; A_1 has been resumed at 2 and 4, A_2 at 4
        let out = parallel_simulate(scripted(vec![(vec![5], true), (vec![100], false)]), &profile(), 0.01, 0, u64::MAX)
            .unwrap();
        assert_eq!(out.result, Ok(0));
        assert_eq!(out.final_slot, 6);
        assert_eq!(out.per_run_pulls, vec![5, 2, 1]);
    }

    #[test]
    fn failing_first_run_schedule_overhead() {
        let own = 40u64;
        let out = parallel_simulate(
            scripted(vec![(vec![7], false), (vec![own], true), (vec![10_000], false), (vec![10_000], false)]),
            &profile(),
            0.01,
            0,
            u64::MAX,
        )
        .unwrap();
        assert_eq!(out.result, Ok(1));
        assert_eq!(out.winner, Some(1));
        assert_eq!(out.per_run_pulls[0], 7);
        assert_eq!(out.per_run_pulls[1], own);
        // A_1 finishes at slot 2(own+1); total ≤ 2^{k+1}(own+1) + A_0's pulls
        assert_eq!(out.final_slot, 2 * (own as u128 + 1));
        assert!(out.total_pulls <= 4 * (own + 1) + 7);
    }

    #[test]
    fn delta_sequence_halves() {
        let mut seen = Vec::new();
        let factory = |d: f64| {
            seen.push(d);
            Ok(Scripted { batches: vec![3], succeed: seen.len() == 3, at: 0, answer: 0 })
        };
        let _ = parallel_simulate(factory, &profile(), 0.01, 0, u64::MAX).unwrap();
        for (k, d) in seen.iter().enumerate() {
            assert!((d - 0.01 / 2f64.powi(k as i32 + 1)).abs() < 1e-18);
        }
    }

    #[test]
    fn pull_cap_stops_endless_failures() {
        let factory = |_| Ok(Scripted { batches: vec![u64::MAX / 4], succeed: true, at: 0, answer: 0 });
        let out = parallel_simulate(factory, &profile(), 0.01, 0, 10_000).unwrap();
        assert_eq!(out.result, Err(RunFailure::PullCap(10_000)));
        assert!(out.total_pulls > 10_000);
    }

    #[test]
    fn event_loop_matches_reference_on_scripts() {
        let cases: Vec<Vec<(Vec<u64>, bool)>> = vec![
            vec![(vec![3, 4, 2], false), (vec![1, 1, 5], false), (vec![2], true)],
            vec![(vec![50], true), (vec![1], true)],
            vec![(vec![9], false), (vec![2, 2, 2, 2, 2, 2, 2, 2], true), (vec![1], false)],
            vec![(vec![1; 20], true), (vec![3; 4], false), (vec![], false), (vec![6], true)],
        ];
        for plans in cases {
            let fast = parallel_simulate(scripted(plans.clone()), &profile(), 0.01, 7, u64::MAX).unwrap();
            let (ans, pulls, t, resumes) = reference(scripted(plans), &profile(), 0.01, 7, 100_000);
            let (k, a) = ans.unwrap();
            assert_eq!(fast.result, Ok(a));
            assert_eq!(fast.winner, Some(k));
            assert_eq!(fast.final_slot, t);
            assert_eq!(fast.per_run_pulls, pulls);
            // every run j is resumed ⌊t/2^j⌋ times, minus the runs after the winner at slot t
            for (j, &r) in resumes.iter().enumerate() {
                let mut expect = t >> j;
                if t % (1 << j) == 0 && j > k {
                    expect -= 1;
                }
                assert_eq!(r, expect);
            }
        }
    }

    #[test]
    fn event_loop_matches_reference_on_naive_runs() {
        let inst = BestSetInstance::explicit(vec![0.6, 0.0, 0.3], vec![vec![0], vec![1], vec![2]]).unwrap();
        let factory = |d: f64| NaiveGapElim::new(&inst, d);
        for seed in 0..3 {
            let fast = parallel_simulate(factory, inst.profile(), 0.05, seed, u64::MAX).unwrap();
            let (ans, pulls, t, _) = reference(factory, inst.profile(), 0.05, seed, 1u128 << 22);
            let (k, a) = ans.unwrap();
            assert_eq!(fast.result, Ok(a));
            assert_eq!(fast.winner, Some(k));
            assert_eq!(fast.final_slot, t);
            assert_eq!(fast.per_run_pulls, pulls);
        }
    }

    #[test]
    fn identical_seeds_reproduce() {
        let inst = BestSetInstance::explicit(vec![0.6, 0.0, 0.3], vec![vec![0], vec![1], vec![2]]).unwrap();
        let f = |d: f64| NaiveGapElim::new(&inst, d);
        let a = parallel_simulate(f, inst.profile(), 0.05, 11, u64::MAX).unwrap();
        let b = parallel_simulate(f, inst.profile(), 0.05, 11, u64::MAX).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(parallel_simulate(scripted(vec![]), &profile(), 0.0, 0, 10).is_err());
    }
}
