//! Scenarios evaluated on members of the Baker family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::variety::identity_row;
use super::{Mutation, RunOptions, Sheet, WitnessChain};
use crate::baker::{baker_instance, BakerInstance, Signature, UP};
use crate::error::{Error, Result};
use crate::relation::{
    check_role, eval_expr, min_alternation, parse_expr, representability_obstruction, symmetric_square,
    alternation_chain, BinRel, Counterexample, Env, Representability, Role, Structure,
};

fn env_of(items: &[(&str, &BinRel)]) -> Env {
    items.iter().map(|(k, v)| (k.to_string(), (*v).clone())).collect()
}

fn eval(inst: &BakerInstance, env: &Env, src: &str) -> Result<BinRel> {
    eval_expr(&inst.algebra, env, &parse_expr(src)?)
}

/// `b(x, y, z)`, read as `u(x, x, y, z)` under signature `u`.
fn b_op(inst: &BakerInstance, x: u32, y: u32, z: u32) -> Result<u32> {
    match inst.signature {
        Signature::B => inst.algebra.apply("b", &[x, y, z]),
        Signature::U => inst.algebra.apply("u", &[x, x, y, z]),
    }
}

fn describe(inst: &BakerInstance, cx: &Counterexample) -> String {
    let s = |x: u32| inst.show(x);
    match cx {
        Counterexample::NotReflexive(x) => format!("({}, {}) is missing", s(*x), s(*x)),
        Counterexample::NotSymmetric(a, b) => {
            format!("({}, {}) present but ({}, {}) missing", s(*a), s(*b), s(*b), s(*a))
        }
        Counterexample::NotTransitive(a, b, c) => format!(
            "({}, {}) and ({}, {}) present but ({}, {}) missing",
            s(*a),
            s(*b),
            s(*b),
            s(*c),
            s(*a),
            s(*c)
        ),
        Counterexample::NotCompatible(v) => {
            let list = |xs: &[u32]| xs.iter().map(|&x| s(x)).collect::<Vec<_>>().join(", ");
            format!(
                "{}({}) = {} but {}({}) = {} and they are not related",
                v.op,
                list(&v.left),
                s(v.image.0),
                v.op,
                list(&v.right),
                s(v.image.1)
            )
        }
    }
}

/// Re-checks that `rel` has `role` on the instance.
fn reassert(sheet: &mut Sheet, inst: &BakerInstance, name: &str, rel: &BinRel, role: Role) -> Result<bool> {
    let check = check_role(&inst.algebra, rel, role)?;
    let computed = match &check.counterexample {
        None => "holds".to_string(),
        Some(cx) => describe(inst, cx),
    };
    sheet.check(format!("{name} is a {role}"), "holds", computed, check.holds());
    Ok(check.holds())
}

fn reassert_canonical(sheet: &mut Sheet, inst: &BakerInstance, beta: &BinRel) -> Result<()> {
    let tag = inst.algebra.name.clone();
    reassert(sheet, inst, &format!("{tag}: alpha"), &inst.alpha, Role::Congruence)?;
    reassert(sheet, inst, &format!("{tag}: beta"), beta, Role::Congruence)?;
    reassert(sheet, inst, &format!("{tag}: gamma"), &inst.gamma, Role::Congruence)?;
    Ok(())
}

fn verdict(holds: bool) -> &'static str {
    if holds {
        "holds"
    } else {
        "fails"
    }
}

fn ends(inst: &BakerInstance) -> (usize, usize) {
    (inst.c[0] as usize, inst.c[inst.n] as usize)
}

/// Alternation length for the positive bound: `2n` for even and `2n - 1`
/// for odd `n`.
fn positive_bound(n: usize) -> usize {
    if n % 2 == 0 {
        2 * n
    } else {
        2 * n - 1
    }
}

fn chain_rows(sheet: &mut Sheet, chain: WitnessChain, expected_len: usize) {
    sheet.eq(format!("{}: length", chain.name), expected_len, chain.len());
    let broken = chain.broken.as_ref().map(|b| {
        format!("link {} from {:?} to {:?} is not in {}", b.position, b.from, b.to, b.relation)
    });
    sheet.check(
        format!("{}: every link in its relation", chain.name),
        "verified",
        broken.as_deref().unwrap_or("verified"),
        chain.verified(),
    );
    sheet.chain(chain);
}

pub(super) fn bds_positive(sheet: &mut Sheet, n: usize, sig: Signature, opts: &RunOptions) -> Result<()> {
    let inst = baker_instance(n, sig, false)?;
    let mut beta = inst.beta.clone();
    if let Some(Mutation::DropBetaPair { from, to }) = opts.mutation {
        if from as usize >= inst.size() || to as usize >= inst.size() || !beta.remove(from as usize, to as usize) {
            return Err(Error::InvalidParameter(format!("({from}, {to}) is not a pair of beta")));
        }
        sheet.value("mutation", format!("beta without ({}, {})", inst.show(from), inst.show(to)));
    }
    reassert_canonical(sheet, &inst, &beta)?;
    let k = positive_bound(n);
    sheet.value("bound", k);
    sheet.value("instance_size", inst.size());
    let env = env_of(&[("al", &inst.alpha), ("be", &beta), ("ga", &inst.gamma)]);
    let lhs = eval(&inst, &env, &format!("meet(al,alt(be,ga,{n}))"))?;
    let rhs = eval(&inst, &env, &format!("alt(meet(al,be),meet(al,ga),{k})"))?;
    let (c0, cn) = ends(&inst);
    sheet.eq("(c0, cn) in alpha(beta o_n gamma)", true, lhs.contains(c0, cn));
    let missing = lhs.first_missing(&rhs);
    sheet.check(
        format!("alpha(beta o_n gamma) within alpha-beta o_{k} alpha-gamma"),
        "holds",
        missing.map_or("holds".to_string(), |(x, y)| {
            format!("({}, {}) missing", inst.show(x as u32), inst.show(y as u32))
        }),
        missing.is_none(),
    );

    let ab = inst.alpha.meet(&beta)?;
    let ag = inst.alpha_gamma();
    let link = |j: usize| -> (String, &BinRel) {
        if j % 2 == 0 {
            ("meet(al,be)".to_string(), &ab)
        } else {
            ("meet(al,ga)".to_string(), &ag)
        }
    };
    let (a, d) = (inst.c[0], inst.c[n]);
    let first = (0..=n).map(|j| b_op(&inst, a, inst.c[j], d)).collect::<Result<Vec<_>>>()?;
    let second = (0..=n).map(|j| b_op(&inst, d, inst.c[j], a)).collect::<Result<Vec<_>>>()?;
    sheet.eq("b(a, cn, d) = b(d, c0, a)", inst.show(first[n]), inst.show(second[0]));
    sheet.eq(
        "chain runs from c0 to cn",
        (inst.show(a), inst.show(d)),
        (inst.show(first[0]), inst.show(second[n])),
    );
    let (elements, links): (Vec<u32>, Vec<(String, &BinRel)>) = if n % 2 == 0 {
        let e = first.iter().chain(&second[1..]).copied().collect();
        let l = (0..n).map(link).chain((0..n).map(link)).collect();
        (e, l)
    } else {
        // the two middle links are both alpha-beta, so one step is saved
        let e = first[..n].iter().chain(&second[1..]).copied().collect();
        let l = (0..n - 1).map(link).chain(std::iter::once(link(0))).chain((1..n).map(link)).collect();
        (e, l)
    };
    let alternates = links.first().is_some_and(|l| l.0 == "meet(al,be)") && links.windows(2).all(|w| w[0].0 != w[1].0);
    sheet.eq("chain links alternate starting with alpha-beta", true, alternates);
    let chain = WitnessChain::verify("b(a,cj,d) then b(d,cj,a)", &inst, &elements, &links)?;
    chain_rows(sheet, chain, k);
    Ok(())
}

pub(super) fn bds_optimal(sheet: &mut Sheet, n: usize, sig: Signature) -> Result<()> {
    let inst = baker_instance(n, sig, false)?;
    reassert_canonical(sheet, &inst, &inst.beta)?;
    let k = positive_bound(n);
    let last = if n % 2 == 0 { "ga" } else { "be" };
    let env = env_of(&[("al", &inst.alpha), ("be", &inst.beta), ("ga", &inst.gamma)]);
    let lhs_src = format!("meet(al,comp(be,alt(meet(al,ga),meet(al,be),{}),{last}))", n - 2);
    let lhs = eval(&inst, &env, &lhs_src)?;
    let (c0, cn) = ends(&inst);
    sheet.eq(format!("(c0, cn) in {lhs_src}"), true, lhs.contains(c0, cn));
    let rhs = eval(&inst, &env, &format!("alt(meet(al,be),meet(al,ga),{})", k - 1))?;
    sheet.eq(format!("(c0, cn) in alpha-beta o_{} alpha-gamma", k - 1), false, rhs.contains(c0, cn));
    let (ab, ag) = (inst.alpha_beta(), inst.alpha_gamma());
    let min_k = min_alternation(&ab, &ag, c0, cn, 4 * n + 4)?.start_p;
    sheet.eq("least alternation from c0 to cn", Some(k), min_k);
    sheet.value("min_k", min_k);
    let mut ef: Vec<u32> = inst.e.iter().chain(&inst.f).copied().collect();
    ef.sort_unstable();
    ef.dedup();
    sheet.eq("upper part equals {e_i} and {f_i}", inst.up.clone(), ef);
    sheet.eq("upper part size", 2 * n + 1, inst.up.len());
    sheet.value("up_size", inst.up.len());
    if let Some(m) = min_k {
        let path = alternation_chain(&ab, &ag, c0, cn, m)?
            .ok_or_else(|| Error::Internal("no chain at the least alternation length".into()))?;
        let elements: Vec<u32> = path.iter().map(|&x| x as u32).collect();
        let links: Vec<(String, &BinRel)> = (0..m)
            .map(|j| if j % 2 == 0 { ("meet(al,be)".to_string(), &ab) } else { ("meet(al,ga)".to_string(), &ag) })
            .collect();
        let up_visited = elements.iter().filter(|&&x| inst.is_up(x)).count();
        sheet.value("chain_up_elements", up_visited);
        if n % 2 == 0 {
            sheet.eq("shortest chain visits the whole upper part", 2 * n + 1, up_visited);
        }
        let chain = WitnessChain::verify("least alternating chain", &inst, &elements, &links)?;
        chain_rows(sheet, chain, k);
    }
    Ok(())
}

pub(super) fn propcon(sheet: &mut Sheet, n: usize) -> Result<()> {
    let even = n % 2 == 0;
    for sig in Signature::all() {
        let full = baker_instance(n, sig, false)?;
        let minus = baker_instance(n, sig, true)?;
        for inst in [&full, &minus] {
            reassert_canonical(sheet, inst, &inst.beta)?;
        }
        let tag = |s: &str, inst: &BakerInstance| format!("{}: {s}", inst.algebra.name);
        let env = |inst: &BakerInstance| env_of(&[("al", &inst.alpha), ("be", &inst.beta), ("ga", &inst.gamma)]);

        // right sides that start with alpha-gamma
        let bound = if even { 2 * n + 1 } else { 2 * n };
        let e = env(&full);
        let lhs = eval(&full, &e, &format!("meet(al,alt(be,ga,{n}))"))?;
        let rhs = eval(&full, &e, &format!("alt(meet(al,ga),meet(al,be),{bound})"))?;
        sheet.eq(tag(&format!("inclusion into alpha-gamma o_{bound} alpha-beta"), &full), "holds", verdict(lhs.is_subset(&rhs)));
        let (c0, cn) = ends(&full);
        let least = min_alternation(&full.alpha_beta(), &full.alpha_gamma(), c0, cn, 4 * n + 4)?.start_q;
        sheet.eq(tag("least alternation starting with alpha-gamma", &full), Some(bound), least);

        let tail = if even { 2 * n - 1 } else { 2 * n - 2 };
        let shaped = |j: usize| format!("comp(meet(al,comp(ga,be)),alt(meet(al,ga),meet(al,be),{j}))");
        for inst in [&full, &minus] {
            let e = env(inst);
            let lhs = eval(inst, &e, &format!("meet(al,alt(be,ga,{n}))"))?;
            let rhs = eval(inst, &e, &shaped(tail))?;
            sheet.eq(tag(&format!("inclusion into {}", shaped(tail)), inst), "holds", verdict(lhs.is_subset(&rhs)));
        }
        let e = env(&minus);
        let (c0, cn) = ends(&minus);
        let gamma_class: Vec<usize> = minus.gamma.successors(c0).collect();
        sheet.eq(tag("c0 is gamma-related only to itself", &minus), vec![c0], gamma_class);
        let mut threshold = None;
        for j in 0..=4 * n {
            if eval(&minus, &e, &shaped(j))?.contains(c0, cn) {
                threshold = Some(j);
                break;
            }
        }
        sheet.eq(tag("least j with (c0, cn) in alpha(gamma o beta) o (alpha-gamma o_j alpha-beta)", &minus), Some(tail), threshold);
        sheet.value(&format!("threshold_{sig}"), threshold);

        let (lhs_src, rhs_src) = if even {
            (
                format!("meet(al,comp(be,alt(meet(al,ga),meet(al,be),{}),ga))", n - 2),
                format!("comp(meet(al,comp(ga,be)),alt(meet(al,ga),meet(al,be),{}),meet(al,comp(ga,be)))", 2 * n - 4),
            )
        } else {
            (
                format!("meet(al,comp(be,alt(meet(al,ga),meet(al,be),{}),be))", n - 2),
                format!("comp(meet(al,comp(ga,be)),alt(meet(al,ga),meet(al,be),{}),meet(al,comp(be,ga)))", 2 * n - 5),
            )
        };
        let lhs = eval(&minus, &e, &lhs_src)?;
        let rhs = eval(&minus, &e, &rhs_src)?;
        sheet.eq(
            tag(&format!("{lhs_src} <= {rhs_src} at (c0, cn)"), &minus),
            (true, false),
            (lhs.contains(c0, cn), rhs.contains(c0, cn)),
        );
    }
    Ok(())
}

pub(super) fn pari(sheet: &mut Sheet, n: usize, sig: Signature, opts: &RunOptions) -> Result<()> {
    let gen = sig.generator();
    let pieces = "meet(t,r),meet(t,s)";
    let rhs = match (n % 2 == 0, sig) {
        (true, _) => format!("alt({pieces},{})", 2 * n),
        (false, Signature::B) => format!("comp(alt({pieces},{n}),alt({pieces},{n}))"),
        (false, Signature::U) => format!("alt({pieces},{})", 2 * n - 1),
    };
    let stmt = format!("meet(t,alt(r,s,{n})) <= {rhs}");
    identity_row(sheet, &stmt, &gen, &stmt, "t:adm,r:adm,s:adm", n, true, opts.variety_max_n)?;
    if n % 2 == 1 && sig == Signature::B {
        let inst = baker_instance(n, sig, false)?;
        reassert_canonical(sheet, &inst, &inst.beta)?;
        let theta = inst.lambda_tolerance()?.meet(&inst.beta)?;
        reassert(sheet, &inst, "Lambda meet beta", &theta, Role::Tolerance)?;
        let env = env_of(&[("al", &inst.alpha), ("ga", &inst.gamma), ("th", &theta)]);
        let (c0, cn) = ends(&inst);
        let lhs = eval(&inst, &env, &format!("meet(al,alt(th,ga,{n}))"))?;
        sheet.eq("(c0, cn) in alpha(theta o_n gamma)", true, lhs.contains(c0, cn));
        let twice = eval(&inst, &env, &format!("comp(alt(meet(al,th),meet(al,ga),{n}),alt(meet(al,th),meet(al,ga),{n}))"))?;
        sheet.eq("(c0, cn) in the doubled alternation", true, twice.contains(c0, cn));
        let at = inst.alpha.meet(&theta)?;
        let least = min_alternation(&at, &inst.alpha_gamma(), c0, cn, 4 * n + 4)?.start_p;
        sheet.check(
            "least alternation of alpha-theta and alpha-gamma",
            format!("> {}", 2 * n),
            least,
            least.map_or(true, |k| k > 2 * n),
        );
        sheet.value("min_k_theta", least);
    }
    Ok(())
}

pub(super) fn moregen(sheet: &mut Sheet, n: usize, sig: Signature) -> Result<()> {
    let inst = baker_instance(n, sig, false)?;
    reassert_canonical(sheet, &inst, &inst.beta)?;
    let (a, d) = (inst.c[0], inst.c[n]);
    let ad = inst
        .element([0, 0, UP])
        .ok_or_else(|| Error::Internal("(0,0,up) is missing".into()))?;
    let mut g = vec![a];
    for i in 1..=n {
        g.push(b_op(&inst, g[i - 1], d, inst.c[i])?);
    }
    let mut h = vec![d; n + 1];
    for j in (0..n).rev() {
        h[j] = b_op(&inst, h[j + 1], a, inst.c[j])?;
    }
    sheet.eq("g_n = ad", inst.show(ad), inst.show(g[n]));
    sheet.eq("h_0 = ad", inst.show(ad), inst.show(h[0]));
    // R_i is beta for odd i and gamma for even i
    let name = |i: usize| if i % 2 == 1 { "be" } else { "ga" };
    let rel = |i: usize| if i % 2 == 1 { &inst.beta } else { &inst.gamma };
    let meets: Vec<BinRel> = (0..=n).map(|i| inst.alpha.meet(rel(i.max(1)))).collect::<Result<_>>()?;
    let link = |i: usize| (format!("meet(al,{})", name(i)), &meets[i]);
    let merged_src = format!(
        "meet(al,comp(meet(al,{rn}),meet(al,{r1})),adm({rn},{r1}))",
        rn = name(n),
        r1 = name(1)
    );
    let merged;
    let (elements, links): (Vec<u32>, Vec<(String, &BinRel)>) = match sig {
        Signature::B => (
            g.iter().chain(&h[1..]).copied().collect(),
            (1..=n).map(link).chain((1..=n).map(link)).collect(),
        ),
        Signature::U => {
            let env = env_of(&[("al", &inst.alpha), ("be", &inst.beta), ("ga", &inst.gamma)]);
            merged = eval(&inst, &env, &merged_src)?;
            (
                g[..n].iter().chain(&h[1..]).copied().collect(),
                (1..n)
                    .map(link)
                    .chain(std::iter::once((merged_src.clone(), &merged)))
                    .chain((2..=n).map(link))
                    .collect(),
            )
        }
    };
    let expected = if sig == Signature::B { 2 * n } else { 2 * n - 1 };
    let chain = WitnessChain::verify("g then h", &inst, &elements, &links)?;
    chain_rows(sheet, chain, expected);
    Ok(())
}

pub(super) fn proprelb(sheet: &mut Sheet, n: usize, sig: Signature, opts: &RunOptions) -> Result<()> {
    let gen = sig.generator();
    let k = if sig == Signature::B { 2 * n } else { 2 * n - 1 };
    let stmt = format!("meet(t,pow(r,{n})) <= pow(meet(t,r),{k})");
    identity_row(sheet, &stmt, &gen, &stmt, "t:adm,r:adm", n, true, opts.variety_max_n)?;

    let inst = baker_instance(n, sig, false)?;
    reassert_canonical(sheet, &inst, &inst.beta)?;
    let psi = inst.psi_tolerance();
    let (label, theta) = match sig {
        Signature::B => ("Lambda meet Psi", inst.lambda_tolerance()?.meet(&psi)?),
        Signature::U => ("Psi", psi),
    };
    reassert(sheet, &inst, label, &theta, Role::Tolerance)?;
    let env = env_of(&[("al", &inst.alpha), ("th", &theta)]);
    let (c0, cn) = ends(&inst);
    let lhs = eval(&inst, &env, &format!("meet(al,comp(th,pow(meet(al,th),{}),th))", n - 2))?;
    sheet.eq("(c0, cn) in alpha(theta o (alpha theta)^(n-2) o theta)", true, lhs.contains(c0, cn));
    let at = inst.alpha.meet(&theta)?;
    let least = min_alternation(&at, &at, c0, cn, 4 * n + 4)?.start_p;
    sheet.eq(format!("least power of alpha meet {label} linking c0 to cn"), Some(k), least);
    sheet.value("threshold", least);
    Ok(())
}

pub(super) fn contol(sheet: &mut Sheet, n: usize, opts: &RunOptions) -> Result<()> {
    let inst = baker_instance(n, Signature::B, false)?;
    let lambda = inst.lambda_tolerance()?;
    reassert(sheet, &inst, "Lambda", &lambda, Role::Tolerance)?;
    let want = Representability::NonRepresentableByWitness;
    sheet.eq("Lambda", want, representability_obstruction(&inst, &lambda)?);
    if n % 2 == 1 {
        let theta = lambda.meet(&inst.beta)?;
        reassert(sheet, &inst, "Lambda meet beta", &theta, Role::Tolerance)?;
        sheet.eq("Lambda meet beta", want, representability_obstruction(&inst, &theta)?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ n as u64);
    let size = inst.size();
    let c = |i: usize| inst.c[i] as usize;
    let target = (inst.e[n - 1] as usize, inst.f[1] as usize);
    let mut premise_failures = 0usize;
    let mut violations = Vec::new();
    for _ in 0..opts.samples {
        let (g, h) = (rng.gen_range(0..size), rng.gen_range(0..size));
        let mut seed = vec![(c(0), g), (c(1), g), (c(n - 1), h), (c(n), h)];
        for _ in 0..rng.gen_range(0..=2) {
            seed.push((rng.gen_range(0..size), rng.gen_range(0..size)));
        }
        let r = inst.algebra.admissible_closure(&BinRel::from_pairs(size, seed)?)?;
        let sq = symmetric_square(&r);
        if !(sq.contains(c(0), c(1)) && sq.contains(c(n - 1), c(n))) {
            premise_failures += 1;
        } else if !sq.contains(target.0, target.1) {
            violations.push((inst.show(g as u32), inst.show(h as u32)));
        }
    }
    sheet.eq("sampled R meeting the premise", opts.samples, opts.samples - premise_failures);
    sheet.eq("sampled R without (e(n-1), f1) in R o R^-1", 0, violations.len());
    sheet.value("samples", opts.samples);
    sheet.value("seed", opts.seed);
    if let Some(v) = violations.first() {
        sheet.value("first_violation", v);
    }
    Ok(())
}

pub(super) fn lr(sheet: &mut Sheet, n: usize) -> Result<()> {
    let b = baker_instance(n, Signature::B, false)?;
    let lambda_b = b.lambda_tolerance()?;
    reassert(sheet, &b, &format!("{}: Lambda", b.algebra.name), &lambda_b, Role::Tolerance)?;

    let u = baker_instance(n, Signature::U, false)?;
    let lambda_u = u.lambda_relation();
    let check = check_role(&u.algebra, &lambda_u, Role::Admissible)?;
    let found = check.counterexample.as_ref().map(|cx| describe(&u, cx));
    sheet.check(
        format!("{}: Lambda is compatible", u.algebra.name),
        "fails",
        found.as_deref().unwrap_or("holds"),
        found.is_some(),
    );
    let (c, e, f) = (&u.c, &u.e, &u.f);
    let left = [c[0], c[0], c[n - 1], c[n]];
    let right = [c[0], c[1], c[n], c[n]];
    let lhs = u.algebra.apply("u", &left)?;
    let rhs = u.algebra.apply("u", &right)?;
    sheet.eq("u(c0, c0, c(n-1), cn)", u.show(e[n - 1]), u.show(lhs));
    sheet.eq("u(c0, c1, cn, cn)", u.show(f[1]), u.show(rhs));
    let args_related = left.iter().zip(&right).all(|(&x, &y)| lambda_u.contains(x as usize, y as usize));
    sheet.eq("argument pairs in Lambda", true, args_related);
    sheet.eq("(e(n-1), f1) in Lambda", false, lambda_u.contains(lhs as usize, rhs as usize));
    sheet.value("witness", format!("u({}) vs u({})", show_all(&u, &left), show_all(&u, &right)));
    Ok(())
}

fn show_all(inst: &BakerInstance, xs: &[u32]) -> String {
    xs.iter().map(|&x| inst.show(x)).collect::<Vec<_>>().join(", ")
}
