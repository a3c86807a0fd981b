use mixq::data::{drawdown_periods, drawdown_series, fit_values, read_prices, records_to_csv, Column};
use proptest::prelude::*;

#[test]
fn reads_dated_table_in_date_order() {
    let text = "Date,Open,Adj Close\n2020-01-03,1,12\n2020-01-02,1,10\n2020-01-06,1,9\n";
    let s = read_prices(text.as_bytes(), &Column::parse("Date"), &Column::parse("Adj Close")).unwrap();
    assert_eq!(s.price, vec![10.0, 12.0, 9.0]);
    assert_eq!(s.labels[0], "2020-01-02");
}

#[test]
fn duplicate_dates_are_rejected() {
    let text = "Date,Adj Close\n2020-01-02,1\n2020-01-02,2\n";
    assert!(read_prices(text.as_bytes(), &Column::parse("Date"), &Column::parse("Adj Close")).is_err());
}

#[test]
fn open_period_is_flagged_and_excluded_by_default() {
    let d = drawdown_series(&[10.0, 8.0, 11.0, 9.0]).unwrap();
    let recs = drawdown_periods(&d);
    assert_eq!(recs.len(), 2);
    assert!(!recs[0].open_ended && recs[1].open_ended);
    assert_eq!(fit_values(&recs, false, false), vec![recs[0].max_drawdown]);
    assert_eq!(fit_values(&recs, true, true).len(), 2);
    let csv = records_to_csv(&recs, None).unwrap();
    assert!(csv.starts_with("start,end,max_drawdown,log_drawdown,open_ended"));
}

#[test]
fn nonpositive_prices_are_rejected() {
    assert!(drawdown_series(&[1.0, 0.0]).is_err());
}

proptest! {
    #[test]
    fn drawdowns_lie_in_unit_interval(steps in prop::collection::vec(-0.1f64..0.1, 1..200)) {
        let mut p = 50.0;
        let prices: Vec<f64> = steps.iter().map(|s| { p *= s.exp(); p }).collect();
        let d = drawdown_series(&prices).unwrap();
        prop_assert!(d.iter().all(|&v| (0.0..1.0).contains(&v)));
        let recs = drawdown_periods(&d);
        for r in &recs {
            prop_assert!(r.max_drawdown > 0.0 && r.start < r.end);
            let peak = d[r.start..=r.end].iter().cloned().fold(0.0, f64::max);
            prop_assert_eq!(peak, r.max_drawdown);
        }
        for w in recs.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
    }
}
