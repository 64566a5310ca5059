use botscope::corpus::{AccountPayload, Entities, TweetRecord, UserObject};
use botscope::features::{default_registry, extract_full};
use chrono::{DateTime, Utc};

fn t(s: &str) -> DateTime<Utc> {
    s.parse().unwrap()
}

fn user(id: &str) -> UserObject {
    UserObject {
        user_id: id.into(),
        screen_name: "ab12c".into(),
        display_name: "Ann".into(),
        created_at: t("2021-05-22T00:00:00Z"),
        followers_count: 9,
        friends_count: 2,
        statuses_count: 33,
        listed_count: 1,
        favourites_count: 4,
        verified: false,
        default_profile: true,
        default_profile_image: false,
        profile_use_background_image: true,
        description: String::new(),
        declared_language: None,
    }
}

fn tweet(id: &str, author: &UserObject, at: &str, text: &str) -> TweetRecord {
    TweetRecord {
        tweet_id: id.into(),
        author: author.clone(),
        created_at: t(at),
        text: text.into(),
        lang: Some("en".into()),
        entities: Entities::default(),
        is_retweet: false,
        is_reply: false,
        retweeted_user_id: None,
        replied_user_id: None,
    }
}

/// Three timeline tweets and two incoming mentions, small enough to work out by hand.
fn micro_payload() -> AccountPayload {
    let me = user("u1");
    let other = user("u4");
    let mut t1 = tweet("1", &me, "2021-05-31T09:00:00Z", "zzz qqq");
    t1.is_reply = true;
    t1.replied_user_id = Some("u3".into());
    t1.entities.user_mentions = vec!["u3".into()];
    let mut t2 = tweet("2", &me, "2021-05-31T10:00:00Z", "hello hello world");
    t2.is_reply = true;
    t2.replied_user_id = Some("u1".into());
    t2.entities.hashtags = vec!["a".into()];
    t2.entities.urls = vec!["https://example.com".into()];
    let mut t3 = tweet("3", &me, "2021-05-31T12:00:00Z", "zzz qqq");
    t3.is_retweet = true;
    t3.retweeted_user_id = Some("u2".into());
    t3.entities.user_mentions = vec!["u2".into()];
    let mentions = ["m1", "m2"]
        .iter()
        .map(|id| {
            let mut m = tweet(id, &other, "2021-05-30T00:00:00Z", "hi u1");
            m.entities.user_mentions = vec!["u1".into()];
            m
        })
        .collect();
    AccountPayload {
        user: me,
        timeline: vec![t3, t2, t1],
        mentions,
        probe_time: t("2021-06-01T00:00:00Z"),
    }
}

#[test]
fn micro_payload_features_by_hand() {
    let payload = micro_payload();
    payload.validate().unwrap();
    let reg = default_registry();
    let v = extract_full(&payload, &reg).unwrap();
    let expected = [
        ("screen_name_length", 5.0),
        ("digits_in_screen_name", 2.0),
        ("name_length", 3.0),
        ("description_length", 0.0),
        ("account_age_days", 10.0),
        ("follower_friend_ratio", 3.0),
        ("tweets_per_day", 3.0),
        ("followers_per_day", 9.0 / 11.0),
        ("verified", 0.0),
        ("default_profile", 1.0),
        ("unique_mentioned_users", 2.0),
        ("unique_retweeted_users", 1.0),
        ("mention_target_entropy", 1.0),
        ("retweet_fraction", 1.0 / 3.0),
        ("reply_fraction", 2.0 / 3.0),
        ("self_reply_fraction", 1.0 / 3.0),
        ("interlocutor_diversity", 0.5),
        ("mentions_received", 2.0),
        ("unique_mentioners", 1.0),
        ("mean_interval_s", 5400.0),
        ("std_interval_s", 1800.0),
        ("min_interval_s", 3600.0),
        ("burstiness", -0.5),
        ("hour_entropy", 3f64.log2()),
        ("timeline_too_short", 0.0),
        ("days_since_last_tweet", 0.5),
        ("mean_words", 7.0 / 3.0),
        ("mean_chars", 31.0 / 3.0),
        ("hashtags_per_tweet", 1.0 / 3.0),
        ("urls_per_tweet", 1.0 / 3.0),
        ("mentions_per_tweet", 2.0 / 3.0),
        ("duplicate_text_fraction", 1.0 / 3.0),
    ];
    for (name, want) in expected {
        let got = v.values[reg.position(name).unwrap()];
        assert!((got - want).abs() < 1e-12, "{name}: {got} != {want}");
    }
}

#[test]
fn timeline_order_does_not_matter() {
    let reg = default_registry();
    let payload = micro_payload();
    let mut reversed = payload.clone();
    reversed.timeline.reverse();
    assert_eq!(
        extract_full(&payload, &reg).unwrap(),
        extract_full(&reversed, &reg).unwrap()
    );
}
