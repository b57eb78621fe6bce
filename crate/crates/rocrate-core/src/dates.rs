//! Syntactic ISO 8601 checking for `datePublished`.
//!
//! Accepts the calendar forms used in crate metadata: `YYYY`, `YYYY-MM`,
//! `YYYY-MM-DD`, and date-time with optional seconds, fraction and offset.

pub(crate) fn is_iso8601(s: &str) -> bool {
    let (date, time) = match s.split_once('T') {
        Some((d, t)) => (d, Some(t)),
        None => (s, None),
    };
    if !valid_date(date, time.is_some()) {
        return false;
    }
    match time {
        None => true,
        Some(t) => valid_time(t),
    }
}

fn all_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn parse_2(s: &str) -> Option<u32> {
    (s.len() == 2 && all_digits(s)).then(|| s.parse().unwrap())
}

fn valid_date(s: &str, requires_day: bool) -> bool {
    let mut parts = s.splitn(3, '-');
    let year = match parts.next() {
        Some(y) if y.len() == 4 && all_digits(y) => y.parse::<i32>().unwrap(),
        _ => return false,
    };
    let month = match parts.next() {
        None => return !requires_day,
        Some(m) => match parse_2(m) {
            Some(m) if (1..=12).contains(&m) => m,
            _ => return false,
        },
    };
    match parts.next() {
        None => !requires_day,
        Some(d) => match parse_2(d) {
            Some(d) => d >= 1 && d <= days_in_month(year, month),
            None => false,
        },
    }
}

fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if year % 4 == 0 && (year % 100 != 0 || year % 400 == 0) => 29,
        2 => 28,
        _ => 0,
    }
}

fn valid_time(s: &str) -> bool {
    let (clock, offset) = match s.find(['Z', 'z', '+']) {
        Some(pos) => (&s[..pos], Some(&s[pos..])),
        // A '-' after the clock digits is an offset sign; within HH:MM it
        // never appears, so any '-' splits clock from offset.
        None => match s.find('-') {
            Some(pos) => (&s[..pos], Some(&s[pos..])),
            None => (s, None),
        },
    };
    if !valid_clock(clock) {
        return false;
    }
    match offset {
        None => true,
        Some(o) => valid_offset(o),
    }
}

fn valid_clock(s: &str) -> bool {
    let (hms, frac) = match s.split_once('.') {
        Some((h, f)) => (h, Some(f)),
        None => (s, None),
    };
    if let Some(f) = frac {
        if !all_digits(f) {
            return false;
        }
    }
    let mut parts = hms.split(':');
    let hour = parts.next().and_then(parse_2);
    let minute = parts.next().and_then(parse_2);
    let second = match parts.next() {
        None => {
            // A fraction requires seconds.
            if frac.is_some() {
                return false;
            }
            Some(0)
        }
        Some(sec) => parse_2(sec),
    };
    if parts.next().is_some() {
        return false;
    }
    matches!((hour, minute, second),
        (Some(h), Some(m), Some(sec)) if h <= 23 && m <= 59 && sec <= 60)
}

fn valid_offset(s: &str) -> bool {
    if s == "Z" || s == "z" {
        return true;
    }
    let rest = match s.strip_prefix(['+', '-']) {
        Some(r) => r,
        None => return false,
    };
    let (h, m) = match rest.split_once(':') {
        Some((h, m)) => (h, m),
        None if rest.len() == 4 => rest.split_at(2),
        None => return (parse_2(rest)).is_some_and(|h| h <= 14),
    };
    matches!((parse_2(h), parse_2(m)), (Some(h), Some(m)) if h <= 14 && m <= 59)
}
