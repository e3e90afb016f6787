//! Transition kernels and chain running.
//!
//! A [`Kernel`] mutates a state in place using a caller-owned random stream.
//! Kernels on finite state spaces may also report their exact one-step law,
//! which lets tests assemble full transition matrices and check detailed
//! balance directly. The random-update and random-permutation combinators
//! propagate that law from their components.

use crate::error::{Error, Result};
use crate::rng::RngStream;

pub trait Kernel<S>: Send + Sync {
    fn step(&self, state: &mut S, rng: &mut RngStream) -> Result<()>;

    fn name(&self) -> String;

    /// Exact law of the next state as `(state, probability)` pairs, when the
    /// kernel can enumerate it.
    fn transition_law(&self, _state: &S) -> Option<Vec<(S, f64)>> {
        None
    }
}

impl<S, K: Kernel<S> + ?Sized> Kernel<S> for Box<K> {
    fn step(&self, state: &mut S, rng: &mut RngStream) -> Result<()> {
        (**self).step(state, rng)
    }

    fn name(&self) -> String {
        (**self).name()
    }

    fn transition_law(&self, state: &S) -> Option<Vec<(S, f64)>> {
        (**self).transition_law(state)
    }
}

/// Metropolis–Hastings acceptance probability `min(1, exp(log_ratio))`.
/// `+∞` (a Gibbs proposal) accepts surely, `-∞` never; NaN is an error.
pub fn acceptance_probability(log_ratio: f64) -> Result<f64> {
    if log_ratio.is_nan() {
        return Err(Error::NonFiniteRatio);
    }
    Ok(if log_ratio >= 0.0 { 1.0 } else { log_ratio.exp() })
}

/// Accepts `proposal` with probability `min(1, exp(log_ratio))`, where
/// `log_ratio` is the log of target ratio times reverse-over-forward
/// proposal density; otherwise returns `state`.
pub fn mh_step<S>(state: S, proposal: S, log_ratio: f64, rng: &mut RngStream) -> Result<S> {
    let alpha = acceptance_probability(log_ratio)?;
    if alpha >= 1.0 || rng.uniform01() < alpha {
        Ok(proposal)
    } else {
        Ok(state)
    }
}

/// Proposal mechanism for [`MetropolisHastings`].
pub trait Proposal<S>: Send + Sync {
    fn propose(&self, from: &S, rng: &mut RngStream) -> S;

    /// `ln R(to | from)`.
    fn log_density(&self, from: &S, to: &S) -> f64;

    /// All reachable states with their probabilities, for finite spaces.
    fn support(&self, _from: &S) -> Option<Vec<(S, f64)>> {
        None
    }
}

/// Generic Metropolis–Hastings kernel for an unnormalized log target.
pub struct MetropolisHastings<S, T, P> {
    log_target: T,
    proposal: P,
    name: String,
    _state: std::marker::PhantomData<fn(S)>,
}

impl<S, T, P> MetropolisHastings<S, T, P>
where
    T: Fn(&S) -> f64 + Send + Sync,
    P: Proposal<S>,
{
    pub fn new(name: impl Into<String>, log_target: T, proposal: P) -> Self {
        MetropolisHastings {
            log_target,
            proposal,
            name: name.into(),
            _state: std::marker::PhantomData,
        }
    }

    fn log_ratio(&self, x: &S, y: &S) -> f64 {
        let num = (self.log_target)(y) + self.proposal.log_density(y, x);
        let den = (self.log_target)(x) + self.proposal.log_density(x, y);
        if den == f64::NEG_INFINITY && num > f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            num - den
        }
    }
}

impl<S, T, P> Kernel<S> for MetropolisHastings<S, T, P>
where
    S: Clone + PartialEq,
    T: Fn(&S) -> f64 + Send + Sync,
    P: Proposal<S>,
{
    fn step(&self, state: &mut S, rng: &mut RngStream) -> Result<()> {
        let y = self.proposal.propose(state, rng);
        let ratio = self.log_ratio(state, &y);
        let current = state.clone();
        *state = mh_step(current, y, ratio, rng)?;
        Ok(())
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn transition_law(&self, x: &S) -> Option<Vec<(S, f64)>> {
        let mut law: Vec<(S, f64)> = vec![(x.clone(), 0.0)];
        let mut stay = 1.0;
        for (y, r) in self.proposal.support(x)? {
            if &y == x {
                continue;
            }
            let moved = r * acceptance_probability(self.log_ratio(x, &y)).ok()?;
            stay -= moved;
            add_mass(&mut law, y, moved);
        }
        law[0].1 += stay;
        Some(law)
    }
}

fn add_mass<S: PartialEq>(law: &mut Vec<(S, f64)>, state: S, mass: f64) {
    match law.iter_mut().find(|(s, _)| *s == state) {
        Some(entry) => entry.1 += mass,
        None => law.push((state, mass)),
    }
}

/// Picks one of `K` kernels uniformly at random at every step.
pub struct RandomUpdate<S> {
    kernels: Vec<Box<dyn Kernel<S>>>,
}

pub fn random_update_kernel<S>(kernels: Vec<Box<dyn Kernel<S>>>) -> Result<RandomUpdate<S>> {
    if kernels.is_empty() {
        return Err(Error::EmptyKernelList);
    }
    Ok(RandomUpdate { kernels })
}

impl<S> RandomUpdate<S> {
    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    /// 0-based index of the component to apply next.
    pub fn pick(&self, rng: &mut RngStream) -> usize {
        rng.uniform_int(self.kernels.len()).expect("nonempty") - 1
    }
}

impl<S: Clone + PartialEq> Kernel<S> for RandomUpdate<S> {
    fn step(&self, state: &mut S, rng: &mut RngStream) -> Result<()> {
        let k = self.pick(rng);
        self.kernels[k].step(state, rng)
    }

    fn name(&self) -> String {
        format!("ru[{}]", names(&self.kernels))
    }

    fn transition_law(&self, x: &S) -> Option<Vec<(S, f64)>> {
        let w = 1.0 / self.kernels.len() as f64;
        let mut law = Vec::new();
        for k in &self.kernels {
            for (y, pr) in k.transition_law(x)? {
                add_mass(&mut law, y, w * pr);
            }
        }
        Some(law)
    }
}

/// Applies all `K` kernels once per step, in a fresh uniformly random order.
pub struct RandomPermutation<S> {
    kernels: Vec<Box<dyn Kernel<S>>>,
}

pub fn random_permutation_kernel<S>(
    kernels: Vec<Box<dyn Kernel<S>>>,
) -> Result<RandomPermutation<S>> {
    if kernels.is_empty() {
        return Err(Error::EmptyKernelList);
    }
    Ok(RandomPermutation { kernels })
}

impl<S> RandomPermutation<S> {
    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    /// 0-based application order for the next step.
    pub fn draw_order(&self, rng: &mut RngStream) -> Vec<usize> {
        rng.permutation(self.kernels.len())
    }
}

impl<S: Clone + PartialEq> Kernel<S> for RandomPermutation<S> {
    fn step(&self, state: &mut S, rng: &mut RngStream) -> Result<()> {
        for k in self.draw_order(rng) {
            self.kernels[k].step(state, rng)?;
        }
        Ok(())
    }

    fn name(&self) -> String {
        format!("rp[{}]", names(&self.kernels))
    }

    fn transition_law(&self, x: &S) -> Option<Vec<(S, f64)>> {
        let perms = permutations(self.kernels.len());
        let w = 1.0 / perms.len() as f64;
        let mut law = Vec::new();
        for perm in perms {
            let mut current = vec![(x.clone(), 1.0)];
            for k in perm {
                let mut next = Vec::new();
                for (s, ps) in &current {
                    for (y, py) in self.kernels[k].transition_law(s)? {
                        add_mass(&mut next, y, ps * py);
                    }
                }
                current = next;
            }
            for (y, py) in current {
                add_mass(&mut law, y, w * py);
            }
        }
        Some(law)
    }
}

fn names<S>(kernels: &[Box<dyn Kernel<S>>]) -> String {
    kernels.iter().map(|k| k.name()).collect::<Vec<_>>().join(",")
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                extend(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Transition matrix of `kernel` over an enumerated finite state space.
/// `None` when the kernel cannot report its law or leaves `states`.
pub fn transition_matrix<S, K>(kernel: &K, states: &[S]) -> Option<Vec<Vec<f64>>>
where
    S: PartialEq,
    K: Kernel<S> + ?Sized,
{
    let n = states.len();
    let mut m = vec![vec![0.0; n]; n];
    for (i, x) in states.iter().enumerate() {
        for (y, pr) in kernel.transition_law(x)? {
            let j = states.iter().position(|s| *s == y)?;
            m[i][j] += pr;
        }
    }
    Some(m)
}

/// `max |π_x P(x,y) - π_y P(y,x)|`.
pub fn detailed_balance_residual(pi: &[f64], p: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for x in 0..pi.len() {
        for y in 0..pi.len() {
            worst = worst.max((pi[x] * p[x][y] - pi[y] * p[y][x]).abs());
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Record {
    /// Every state `x⁰ … xʳ`.
    All,
    /// Only `x⁰` and `xʳ` (just `x⁰` when `r = 0`).
    Endpoints,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainTrace<S> {
    pub states: Vec<S>,
    pub steps: usize,
    pub chain_id: usize,
    pub stream_id: u64,
}

impl<S> ChainTrace<S> {
    pub fn initial(&self) -> &S {
        &self.states[0]
    }

    pub fn last(&self) -> &S {
        self.states.last().expect("trace holds at least x0")
    }
}

/// Applies `kernel` `r` times starting from `x0`.
pub fn run_chain<S, K>(
    x0: S,
    kernel: &K,
    r: usize,
    rng: &mut RngStream,
    record: Record,
    chain_id: usize,
) -> Result<ChainTrace<S>>
where
    S: Clone,
    K: Kernel<S> + ?Sized,
{
    let mut states = Vec::with_capacity(match record {
        Record::All => r + 1,
        Record::Endpoints => 2,
    });
    states.push(x0.clone());
    let mut x = x0;
    for _ in 0..r {
        kernel.step(&mut x, rng)?;
        if record == Record::All {
            states.push(x.clone());
        }
    }
    if record == Record::Endpoints && r > 0 {
        states.push(x);
    }
    Ok(ChainTrace {
        states,
        steps: r,
        chain_id,
        stream_id: rng.stream_id(),
    })
}
