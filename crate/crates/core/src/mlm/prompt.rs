use crate::{Error, Result};

pub const TEMPLATE_IDS: [u8; 4] = [1, 2, 3, 4];
pub const MAX_MASKS: usize = 4;

const IRREGULAR_PLURALS: &[(&str, &str)] = &[
    ("child", "children"),
    ("fish", "fish"),
    ("foot", "feet"),
    ("goose", "geese"),
    ("knife", "knives"),
    ("leaf", "leaves"),
    ("man", "men"),
    ("mouse", "mice"),
    ("person", "people"),
    ("sheep", "sheep"),
    ("tooth", "teeth"),
    ("wife", "wives"),
    ("woman", "women"),
];

/// Plural used for "Cs" in the templates. Categories that already end in
/// `s` are taken verbatim.
pub fn pluralize(category: &str) -> String {
    if category.ends_with('s') {
        return category.to_string();
    }
    let (head, last) = match category.rsplit_once(' ') {
        Some((h, l)) => (format!("{h} "), l),
        None => (String::new(), category),
    };
    if let Some((_, p)) = IRREGULAR_PLURALS.iter().find(|(s, _)| *s == last) {
        return format!("{head}{p}");
    }
    let plural = if let Some(stem) = last.strip_suffix('y') {
        match stem.chars().last() {
            Some(c) if !"aeiou".contains(c) => format!("{stem}ies"),
            _ => format!("{last}s"),
        }
    } else if ["ch", "sh", "x", "z"].iter().any(|s| last.ends_with(s)) {
        format!("{last}es")
    } else {
        format!("{last}s")
    };
    format!("{head}{plural}")
}

/// "the a", "the a and the b", "the a, the b, and the c".
fn enumerate(items: &[String]) -> String {
    let phrases: Vec<String> = items.iter().map(|w| format!("the {w}")).collect();
    match phrases.as_slice() {
        [] => String::new(),
        [one] => one.clone(),
        [a, b] => format!("{a} and {b}"),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Renders prompt template `template_id` with the context items followed by
/// `mask_count` adjacent copies of `mask_token`.
pub fn build_prompt(
    template_id: u8,
    category: &str,
    context: &[String],
    mask_count: usize,
    mask_token: &str,
) -> Result<String> {
    if !(1..=MAX_MASKS).contains(&mask_count) {
        return Err(Error::Validation(format!(
            "mask count must be between 1 and {MAX_MASKS}, got {mask_count}"
        )));
    }
    let mut items = context.to_vec();
    items.push(mask_token.repeat(mask_count));
    let list = enumerate(&items);
    let cs = pluralize(category);
    let prompt = match template_id {
        1 => format!("{} are examples of {cs}.", capitalize(&list)),
        2 => format!("Examples of {cs} are {list}."),
        3 => format!("{} are the first {cs} that come to my mind.", capitalize(&list)),
        4 => format!("The first {cs} that come to my mind are {list}."),
        other => {
            return Err(Error::Validation(format!(
                "prompt template must be between 1 and 4, got {other}"
            )))
        }
    };
    Ok(prompt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn items(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn examples() {
        assert_eq!(
            build_prompt(2, "fruits", &items(&["strawberry"]), 2, "[MASK]").unwrap(),
            "Examples of fruits are the strawberry and the [MASK][MASK]."
        );
        assert_eq!(
            build_prompt(1, "fruits", &[], 1, "[MASK]").unwrap(),
            "The [MASK] are examples of fruits."
        );
        assert_eq!(
            build_prompt(3, "animals", &items(&["dog", "cat"]), 1, "[MASK]").unwrap(),
            "The dog, the cat, and the [MASK] are the first animals that come to my mind."
        );
        assert_eq!(
            build_prompt(4, "tool", &items(&["saw"]), 1, "<mask>").unwrap(),
            "The first tools that come to my mind are the saw and the <mask>."
        );
    }

    #[test]
    fn invalid_arguments() {
        assert!(build_prompt(2, "fruits", &[], 0, "[MASK]").is_err());
        assert!(build_prompt(2, "fruits", &[], 5, "[MASK]").is_err());
        assert!(build_prompt(5, "fruits", &[], 1, "[MASK]").is_err());
    }

    #[test]
    fn plurals() {
        for (c, p) in [
            ("fruits", "fruits"),
            ("fruit", "fruits"),
            ("body part", "body parts"),
            ("country", "countries"),
            ("toy", "toys"),
            ("box", "boxes"),
            ("fish", "fish"),
            ("kitchen utensil", "kitchen utensils"),
        ] {
            assert_eq!(pluralize(c), p);
        }
    }

    #[test]
    fn mask_and_item_counts() {
        let ctx = items(&["apple", "pear", "plum"]);
        for t in TEMPLATE_IDS {
            for m in 1..=MAX_MASKS {
                for n in 0..=ctx.len() {
                    let p = build_prompt(t, "fruits", &ctx[..n], m, "<mask>").unwrap();
                    assert_eq!(p.matches("<mask>").count(), m);
                    for w in &ctx[..n] {
                        assert_eq!(p.to_lowercase().matches(&format!("the {w}")).count(), 1);
                    }
                    assert!(!p.contains(" and the <mask>") || n > 0);
                }
            }
        }
    }
}
