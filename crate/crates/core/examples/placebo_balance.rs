//! Mortality-matched placebo groups and covariate balance.

use didkit::extras::{balance_check, load_covariates, load_mortality, placebo_groups, reference_profile};

const MORTALITY: &str = "municipality,month,excess_mortality
codogno,2020-02,30
codogno,2020-03,300
lodi,2020-02,25
lodi,2020-03,260
pavia,2020-02,10
pavia,2020-03,120
cremona,2020-02,20
cremona,2020-03,240
monza,2020-02,5
monza,2020-03,60
varese,2020-02,2
varese,2020-03,30
";

const COVARIATES: &str = "municipality,population,median_age
codogno,15900,46
lodi,45000,45
pavia,72000,47
cremona,72000,48
monza,123000,45
varese,80000,47
";

fn main() -> didkit::Result<()> {
    let profiles = load_mortality(MORTALITY.as_bytes())?;
    let red = vec!["codogno".to_string()];
    let reference = reference_profile(&profiles, &red)?;
    let candidates: Vec<_> = profiles.into_iter().filter(|p| !red.contains(&p.municipality)).collect();
    let groups = placebo_groups(&candidates, &reference, 2)?;
    println!("placebo treated {:?}, placebo control {:?}", groups.treated, groups.control);

    let table = load_covariates(COVARIATES.as_bytes())?;
    for row in balance_check(&table, &["codogno".into(), "lodi".into()], &["monza".into(), "varese".into(), "pavia".into()])? {
        println!("{:<11} SMD {:+.3} p {:.3}{}", row.covariate, row.smd, row.p, if row.imbalanced { " imbalanced" } else { "" });
    }
    Ok(())
}
