use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtfm::nlgen::*;
use rtfm::worldgen::*;
use rtfm::Error;

fn sample(rng: &mut ChaCha8Rng, group: bool) -> (EntityCatalog, DynamicsAssignment) {
    let catalog = load_catalog();
    let config = EpisodeConfig {
        group,
        ..EpisodeConfig::default()
    };
    let (train, _) = split_assignments(&catalog, config.eval_fraction, config.split_seed).unwrap();
    let a = sample_dynamics(rng, &config, &catalog, &train).unwrap();
    (catalog, a)
}

#[test]
fn rendered_documents_parse_back_to_the_assignment() {
    let pack = TemplatePack::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for i in 0..2000 {
        let group = i % 2 == 0;
        let (catalog, a) = sample(&mut rng, group);
        for nl in [false, true] {
            let t = render_texts(&a, &mut rng, nl, &pack);
            let parsed = extract_assignment(&t.document.text, &t.goal, &catalog, &pack).unwrap();
            assert!(parsed.matches(&a), "{}", t.document.text);
        }
    }
}

#[test]
fn every_template_parses_with_every_entity() {
    let pack = TemplatePack::standard();
    let catalog = load_catalog();
    for (i, _) in pack.team_templates.iter().enumerate() {
        for team in &catalog.teams {
            for monsters in [vec!["bat".to_string()], vec!["bat".to_string(), "wolf".to_string()]] {
                let s = Statement::Team {
                    team: team.clone(),
                    monsters,
                };
                let text = render_statement(&s, Some(i), &pack);
                assert_eq!(parse_statement(&text, &catalog, &pack).unwrap(), s, "{text}");
            }
        }
    }
    for (i, _) in pack.modifier_templates.iter().enumerate() {
        for element in &catalog.elements {
            for modifiers in [
                vec!["Grandmaster's".to_string()],
                vec!["arcane".to_string(), "blessed".to_string()],
            ] {
                let s = Statement::Beats {
                    element: element.clone(),
                    modifiers,
                };
                let text = render_statement(&s, Some(i), &pack);
                assert_eq!(parse_statement(&text, &catalog, &pack).unwrap(), s, "{text}");
            }
        }
    }
    for (i, _) in pack.goal_templates.iter().enumerate() {
        for team in &catalog.teams {
            let text = render_goal(team, Some(i), &pack);
            assert_eq!(&parse_goal(&text, &catalog, &pack).unwrap(), team);
        }
    }
}

#[test]
fn dropping_a_statement_is_reported() {
    let pack = TemplatePack::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (catalog, a) = sample(&mut rng, false);
    let t = render_texts(&a, &mut rng, true, &pack);
    let statements = split_statements(&t.document.text);
    let drop = rng.gen_range(0..statements.len());
    let partial: Vec<&str> = statements
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != drop)
        .map(|(_, s)| *s)
        .collect();
    let err = extract_assignment(&partial.join(" "), &t.goal, &catalog, &pack).unwrap_err();
    assert!(matches!(err, Error::MissingStatement(_)), "{err}");
}

#[test]
fn repeated_statement_is_a_conflict() {
    let pack = TemplatePack::standard();
    let catalog = load_catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (_, a) = sample(&mut rng, false);
    let t = render_texts(&a, &mut rng, false, &pack);
    let first = split_statements(&t.document.text)[0].to_string();
    let doc = format!("{} {first}", t.document.text);
    let err = extract_assignment(&doc, &t.goal, &catalog, &pack).unwrap_err();
    assert!(matches!(err, Error::ConflictingStatement(_)), "{err}");
}

#[test]
fn gibberish_is_unparseable() {
    let pack = TemplatePack::standard();
    let catalog = load_catalog();
    let err = parse_statement("The cake is a lie.", &catalog, &pack).unwrap_err();
    assert!(matches!(err, Error::Unparseable(_)));
}

#[test]
fn minimal_canonical_document() {
    let pack = TemplatePack::standard();
    let catalog = load_catalog().reduced(2, 1, 2, 2, 2).unwrap();
    let doc = format!(
        "{}: {}. {}: {}. {} beats {}. {} beats {}.",
        catalog.teams[0],
        catalog.monsters[0],
        catalog.teams[1],
        catalog.monsters[1],
        catalog.modifiers[0],
        catalog.elements[0],
        catalog.modifiers[1],
        catalog.elements[1]
    );
    let goal = format!("Defeat the {}.", catalog.teams[1]);
    let parsed = extract_assignment(&doc, &goal, &catalog, &pack).unwrap();
    assert_eq!(parsed.target_team, catalog.teams[1]);
    assert_eq!(parsed.monster_team[&catalog.monsters[1]], catalog.teams[1]);
    assert_eq!(parsed.modifier_element[&catalog.modifiers[0]], catalog.elements[0]);
}

#[test]
fn statement_order_follows_the_recorded_seed() {
    let pack = TemplatePack::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (_, a) = sample(&mut rng, true);
    let mut r1 = ChaCha8Rng::seed_from_u64(77);
    let mut r2 = ChaCha8Rng::seed_from_u64(77);
    let t1 = render_texts(&a, &mut r1, true, &pack);
    let t2 = render_texts(&a, &mut r2, true, &pack);
    assert_eq!(t1, t2);
    assert_eq!(t1.document.statements.len(), 7);
}

#[test]
fn pack_json_must_have_full_template_families() {
    let standard = include_str!("../assets/templates.json");
    assert!(TemplatePack::from_json(standard).is_ok());
    let mut v: serde_json::Value = serde_json::from_str(standard).unwrap();
    v["team_templates"].as_array_mut().unwrap().pop();
    assert!(matches!(TemplatePack::from_json(&v.to_string()), Err(Error::Pack(_))));
    v = serde_json::from_str(standard).unwrap();
    v["version"] = 2.into();
    assert!(matches!(TemplatePack::from_json(&v.to_string()), Err(Error::Pack(_))));
}

#[test]
fn vocabulary_covers_templates_and_catalog() {
    let pack = TemplatePack::standard();
    let catalog = load_catalog();
    let vocab = Vocab::build(&catalog, &pack, &[]);
    let unk = vocab.id(UNK);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let (_, a) = sample(&mut rng, true);
        let t = render_texts(&a, &mut rng, true, &pack);
        assert!(vocab.encode(&t.document.text).iter().all(|&i| i != unk));
        assert!(vocab.encode(&t.goal).iter().all(|&i| i != unk));
    }
    assert_eq!(
        tokenize("Grandmaster's sword, Beats!"),
        ["grandmasters", "sword", "beats"]
    );
}
