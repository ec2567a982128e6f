//! Loading tweet records: period assignment, exclusion windows and cohorts.

use didkit::panel::{load_panel, PeriodScheme, TreatmentSchedule};

const CSV: &str = "tweet_id,user_id,municipality,date,zone,uncertainty
1,anna,codogno,2020-02-10,red,0
2,anna,codogno,2020-02-21,red,1
3,anna,codogno,2020-02-25,red,1
4,bruno,pavia,2020-02-12,orange,0
5,bruno,pavia,2020-03-01,orange,0
6,bruno,pavia,2020-03-12,orange,1
7,carla,pavia,2020-04-02,orange,1
";

fn main() {
    match load_panel(CSV.as_bytes(), &PeriodScheme::lockdown_default(), &TreatmentSchedule::lockdown_default()) {
        Ok((panel, report)) => {
            println!("{} of {} rows kept, {} in exclusion windows", report.build.retained, report.build.input_rows, report.build.dropped());
            for r in &report.build.rejected_out_of_window {
                println!("rejected: {r:?}");
            }
            for i in 0..panel.len() {
                println!(
                    "tweet {} period {} cohort {} treated {}",
                    panel.tweet_id(i),
                    panel.scheme().label(panel.period(i)).unwrap_or("?"),
                    panel.cohort(i),
                    panel.treated_now(i)
                );
            }
        }
        Err(e) => eprintln!("{e}"),
    }
}
