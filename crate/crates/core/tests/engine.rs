use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rtfm::engine::*;
use rtfm::worldgen::{EpisodeConfig, Preset};
use rtfm::Error;

/// The entities of a generated episode moved to fixed cells. Monster 0 is
/// the target and item 0 beats it; `None` item positions are held.
fn layout(config: EpisodeConfig, agent: Pos, monsters: [Pos; 2], items: [Option<Pos>; 2], walls: &[Pos]) -> WorldState {
    let env = Environment::new(config.clone()).unwrap();
    let s = env.reset(0).unwrap();
    let mut ms = s.monsters.clone();
    for (m, p) in ms.iter_mut().zip(monsters) {
        m.pos = p;
    }
    let mut its = s.items.clone();
    for (it, p) in its.iter_mut().zip(items) {
        it.pos = p;
    }
    WorldState::from_layout(config, s.rules, s.goal, s.doc, agent, ms, its, walls, 1).unwrap()
}

fn p(x: i32, y: i32) -> Pos {
    Pos::new(x, y)
}

#[test]
fn walking_onto_an_item_picks_it_up_and_swaps_the_held_one() {
    let mut s = layout(
        Preset::Base6.config(),
        p(1, 1),
        [p(4, 4), p(4, 1)],
        [Some(p(2, 1)), Some(p(3, 1))],
        &[],
    );
    let phrase0 = s.items[0].phrase();
    let r = s.step(Action::Right).unwrap();
    assert_eq!(s.agent, p(2, 1));
    assert_eq!(r.observation.inventory, phrase0);
    assert_eq!(r.observation.cells[2][1], AGENT);
    assert_eq!(r.observation.cells[1][1], EMPTY);
    let r = s.step(Action::Right).unwrap();
    assert_eq!(r.observation.inventory, s.items[1].phrase());
    assert_eq!(r.observation.cells[2][1], phrase0);
    assert_eq!(s.items[0].pos, Some(p(2, 1)));
    assert_eq!(s.items[1].pos, None);
}

#[test]
fn armed_attack_on_the_target_wins() {
    let mut s = layout(
        Preset::Base6.config(),
        p(1, 1),
        [p(2, 1), p(4, 4)],
        [None, Some(p(3, 3))],
        &[],
    );
    let r = s.step(Action::Right).unwrap();
    assert_eq!(r.outcome, Outcome::Win);
    assert_eq!(r.reward, 1.0);
    assert_eq!(r.shaped_reward, 1.0);
    assert!(r.done);
    assert_eq!(s.agent, p(1, 1));
    let c = r.contact.unwrap();
    assert_eq!(
        (c.monster, c.initiator, c.result),
        (0, Initiator::Agent, CombatResult::Win)
    );
    assert!(matches!(s.step(Action::Stay), Err(Error::SteppedAfterDone)));
}

#[test]
fn unarmed_or_wrongly_armed_attacks_lose() {
    let cases = [
        // Unarmed against the target.
        ([p(2, 1), p(4, 4)], [Some(p(3, 3)), Some(p(4, 3))]),
        // Holding the distractor's item against the target.
        ([p(2, 1), p(4, 4)], [Some(p(3, 3)), None]),
        // Holding the target's item against the distractor.
        ([p(4, 4), p(2, 1)], [None, Some(p(3, 3))]),
    ];
    for (monsters, items) in cases {
        let mut s = layout(Preset::Base6.config(), p(1, 1), monsters, items, &[]);
        let r = s.step(Action::Right).unwrap();
        assert_eq!(r.outcome, Outcome::LossCombat);
        assert_eq!(r.reward, -1.0);
    }
}

#[test]
fn frame_cap_ends_in_a_loss() {
    let mut config = Preset::Base6.config();
    config.max_frames = 3;
    let mut s = layout(config, p(1, 1), [p(4, 4), p(4, 1)], [Some(p(2, 3)), Some(p(3, 3))], &[]);
    let mut rewards = Vec::new();
    let mut shaped = Vec::new();
    for _ in 0..3 {
        let r = s.step(Action::Stay).unwrap();
        rewards.push(r.reward);
        shaped.push(r.shaped_reward);
    }
    assert_eq!(rewards, [0.0, 0.0, -1.0]);
    assert_eq!(shaped, [-0.02, -0.02, -1.0]);
    assert_eq!(s.outcome, Outcome::LossTimeout);
    assert_eq!(s.frame, 3);
}

#[test]
fn walls_block_the_agent() {
    let mut s = layout(
        Preset::Base6.config(),
        p(1, 1),
        [p(4, 4), p(4, 1)],
        [Some(p(2, 3)), Some(p(3, 3))],
        &[p(2, 1)],
    );
    s.step(Action::Up).unwrap();
    s.step(Action::Left).unwrap();
    s.step(Action::Right).unwrap();
    assert_eq!(s.agent, p(1, 1));
    assert_eq!(s.frame, 3);
}

fn random_rollout(preset: Preset, seed: u64) -> (Vec<f64>, Vec<Observation>) {
    let env = Environment::new(preset.config()).unwrap();
    let mut s = env.reset(seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
    let mut rewards = Vec::new();
    let mut obs = vec![s.render_observation()];
    while !s.is_done() && s.frame < 200 {
        let r = s.step(*Action::ALL.choose(&mut rng).unwrap()).unwrap();
        rewards.push(r.reward);
        obs.push(r.observation);
    }
    (rewards, obs)
}

#[test]
fn same_seed_same_episode() {
    for preset in Preset::ALL {
        for seed in 0..20 {
            assert_eq!(random_rollout(preset, seed), random_rollout(preset, seed));
        }
    }
    let env = Environment::new(Preset::Full10.config()).unwrap();
    let a = serde_json::to_string(&env.reset(5).unwrap()).unwrap();
    assert_eq!(a, serde_json::to_string(&env.reset(5).unwrap()).unwrap());
    assert_ne!(a, serde_json::to_string(&env.reset(6).unwrap()).unwrap());
}

#[test]
fn serialized_state_resumes_identically() {
    let env = Environment::new(Preset::Full10.config()).unwrap();
    let mut s = env.reset(3).unwrap();
    for _ in 0..2 {
        if !s.is_done() {
            s.step(Action::Stay).unwrap();
        }
    }
    let mut copy: WorldState = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(copy, s);
    let moves = [
        Action::Up,
        Action::Left,
        Action::Stay,
        Action::Down,
        Action::Right,
        Action::Stay,
    ];
    for a in moves {
        if s.is_done() {
            break;
        }
        assert_eq!(s.step(a).unwrap(), copy.step(a).unwrap());
    }
}

fn check_occupancy(s: &WorldState) {
    let (w, h) = (s.width(), s.height());
    let mut taken = HashSet::new();
    assert!(taken.insert(s.agent));
    for (i, m) in s.monsters.iter().enumerate() {
        assert!(taken.insert(m.pos), "monster {i} overlaps");
        assert_eq!(s.cell(m.pos), Cell::Monster(i));
    }
    let mut held = 0;
    for (i, it) in s.items.iter().enumerate() {
        match it.pos {
            Some(pos) => {
                assert!(taken.insert(pos), "item {i} overlaps");
                assert_eq!(s.cell(pos), Cell::Item(i));
            }
            None => {
                held += 1;
                assert_eq!(s.inventory, Some(i));
            }
        }
    }
    assert!(held <= 1);
    for x in 0..w as i32 {
        for y in 0..h as i32 {
            let border = x == 0 || y == 0 || x == w as i32 - 1 || y == h as i32 - 1;
            if border {
                assert_eq!(s.cell(p(x, y)), Cell::Wall);
            }
        }
    }
}

#[test]
fn entities_are_conserved_and_never_overlap() {
    for preset in [Preset::Full6, Preset::Full10, Preset::Base6, Preset::Rps] {
        let env = Environment::new(preset.config()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for seed in 0..100 {
            let mut s = env.reset(seed).unwrap();
            let (m, i) = (s.monsters.len(), s.items.len());
            check_occupancy(&s);
            while !s.is_done() && s.frame < 100 {
                s.step(*Action::ALL.choose(&mut rng).unwrap()).unwrap();
                assert_eq!((s.monsters.len(), s.items.len()), (m, i));
                check_occupancy(&s);
            }
        }
    }
}

#[test]
fn monsters_stand_still_without_dyna() {
    let env = Environment::new(Preset::Base10.config()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..100 {
        let mut s = env.reset(seed).unwrap();
        let start: Vec<Pos> = s.monsters.iter().map(|m| m.pos).collect();
        while !s.is_done() && s.frame < 100 {
            s.step(*Action::ALL.choose(&mut rng).unwrap()).unwrap();
            assert_eq!(s.monsters.iter().map(|m| m.pos).collect::<Vec<_>>(), start);
        }
    }
}

#[test]
fn cornered_monster_can_only_stay() {
    let mut config = Preset::Full6.config();
    config.group = false;
    // Walls right of and below the corner monster.
    let s = layout(
        config,
        p(4, 4),
        [p(1, 1), p(4, 1)],
        [Some(p(3, 3)), Some(p(3, 4))],
        &[p(2, 1), p(1, 2)],
    );
    assert_eq!(s.legal_monster_moves(0), vec![(Action::Stay, p(1, 1))]);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut chased = 0;
    for _ in 0..2000 {
        let t = monster_transition(&s, 0, &mut rng);
        assert_eq!(t.to, p(1, 1));
        if t.chased {
            chased += 1;
            assert!(t.fallback);
        }
    }
    assert!((1100..1300).contains(&chased), "{chased}");
}

#[test]
fn corner_monster_move_distribution() {
    // From (1, 1) with the agent along the top row, legal moves are stay,
    // right and down; only right is closer, so
    // P(right) = 0.6 + 0.4 / 3 and P(stay) = P(down) = 0.4 / 3.
    let s = layout(
        Preset::Full6.config(),
        p(4, 1),
        [p(1, 1), p(4, 4)],
        [Some(p(3, 3)), Some(p(2, 4))],
        &[],
    );
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 30_000;
    let mut counts = [0usize; 3];
    for _ in 0..n {
        let t = monster_transition(&s, 0, &mut rng);
        match (t.to.x, t.to.y) {
            (2, 1) => counts[0] += 1,
            (1, 1) => counts[1] += 1,
            (1, 2) => counts[2] += 1,
            other => panic!("illegal move to {other:?}"),
        }
        if t.chased {
            assert_eq!(t.to, p(2, 1));
        }
    }
    let expect = [0.6 + 0.4 / 3.0, 0.4 / 3.0, 0.4 / 3.0];
    for (c, e) in counts.iter().zip(expect) {
        let f = *c as f64 / n as f64;
        assert!((f - e).abs() < 0.015, "{counts:?}");
    }
}

#[test]
fn monsters_never_walk_onto_items() {
    // Only the agent's cell is open besides staying: items on the other sides.
    let s = layout(
        Preset::Full6.config(),
        p(2, 1),
        [p(1, 1), p(4, 4)],
        [Some(p(1, 2)), Some(p(3, 3))],
        &[],
    );
    let moves: HashSet<Pos> = s.legal_monster_moves(0).into_iter().map(|(_, q)| q).collect();
    assert_eq!(moves, HashSet::from([p(1, 1), p(2, 1)]));
}

#[test]
fn chase_branch_fraction_is_sixty_percent() {
    let env = Environment::new(Preset::Full10.config()).unwrap();
    let s = chase_statistic(&env, 20_000, 9).unwrap();
    assert!((0.58..0.62).contains(&s.chase_fraction()), "{s:?}");
    assert_eq!(s.chase_violations, 0);
}

#[test]
fn observations_are_text() {
    let env = Environment::new(Preset::Base6.config()).unwrap();
    let s = env.reset(0).unwrap();
    let o = s.render_observation();
    assert_eq!(o.cells[s.agent.x as usize][s.agent.y as usize], AGENT);
    assert_eq!(o.cells[0][0], WALL);
    assert_eq!(o.inventory, EMPTY);
    for m in &s.monsters {
        assert_eq!(
            o.cells[m.pos.x as usize][m.pos.y as usize],
            format!("{} {}", m.element, m.name)
        );
    }
    for it in &s.items {
        let q = it.pos.unwrap();
        assert_eq!(
            o.cells[q.x as usize][q.y as usize],
            format!("{} {}", it.modifier, it.weapon.as_deref().unwrap())
        );
    }
    assert_eq!(o.frame, 0);
    assert!(!o.doc.is_empty() && !o.goal.is_empty());
}

#[test]
fn bad_configs_are_rejected() {
    let mut c = Preset::Base6.config();
    c.width = 3;
    assert!(matches!(Environment::new(c), Err(Error::InvalidConfig(_))));
    let mut c = Preset::Base6.config();
    c.discount = 0.0;
    assert!(matches!(Environment::new(c), Err(Error::InvalidConfig(_))));
    let mut c = Preset::Base6.config();
    c.step_penalty = 0.5;
    assert!(matches!(Environment::new(c), Err(Error::InvalidConfig(_))));
}
