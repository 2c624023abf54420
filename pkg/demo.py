"""
Demo Script for SurvEff
Walks through ingestion, case-study analysis, scores, weight functions and a small simulation
"""

import os
from pathlib import Path

import numpy as np

from modules.asymptotics import max_standardized_gap, schoenfeld_power
from modules.case_study import analyze_dataset
from modules.data_ingestion import DataIngestion, write_csv
from modules.data_validation import TrialDataValidator
from modules.scenarios import load_scenarios, select_scenario
from modules.scores import patient_scores, score_summary
from modules.simulation import run_scenario, simulate_trial


def print_header(text):
    """Print a formatted header"""
    print("\n" + "="*70)
    print(f"  {text}")
    print("="*70 + "\n")


def demo_workflow():
    """Demonstrate the complete SurvEff workflow"""

    print_header("🚀 SurvEff Demo")

    scenarios = load_scenarios()
    scenario = select_scenario(scenarios, 6)
    data_path = Path('data/sample_trial_data.csv')

    # Step 1: Data Ingestion
    print_header("📁 Step 1: Data Ingestion")

    if not data_path.exists():
        print(f"Simulating a trial from scenario {scenario.label}...")
        os.makedirs(data_path.parent, exist_ok=True)
        write_csv(simulate_trial(scenario, np.random.default_rng(42), scenario.t_H), data_path)

    ingestion = DataIngestion()
    dataset, metadata = ingestion.ingest_data(str(data_path))

    print(f"\n✅ Successfully loaded data:")
    print(f"   - Patients: {metadata['rows']}")
    print(f"   - Events: {metadata['events']}")
    print(f"   - Max follow-up: {metadata['max_time']:.3f}")
    print("\n📋 Per-Arm Summary:")
    print(ingestion.describe(dataset).to_string(index=False))

    # Step 2: Data Validation
    print_header("✅ Step 2: Data Validation")

    validator = TrialDataValidator()
    validation_results = validator.validate_data(ingestion.read_raw(str(data_path)))
    print(validator.generate_validation_report(validation_results))

    # Step 3: Case Study Analysis
    print_header("🧪 Step 3: Case Study Analysis")

    tau = 2.5
    report = analyze_dataset(dataset, tau, "years", "sample trial")
    print(f"   - Hazard ratio: {report.hazard_ratio:.3f}")
    print(f"   - Cox Z: {report.cox_z:.3f} (score {report.cox_score_z:.3f}, log-rank {report.logrank_z:.3f})")
    print(f"   - RMST difference at tau={tau}: {report.rmst_diff:.3f} "
          f"(95% CI {report.rmst_diff_lower:.3f} to {report.rmst_diff_upper:.3f})")
    print(f"   - RMST Z: {report.rmst_z:.3f}")
    print(f"   - Events after tau: {report.pct_events_after_tau:.1f}%")

    # Step 4: Scores
    print_header("🧮 Step 4: Patient Scores")

    summary = score_summary(patient_scores(dataset, tau))
    for kind, s in summary.items():
        print(f"   - {kind}: arm 0 {s.mean_arm0:+.3f}, arm 1 {s.mean_arm1:+.3f}, diff {s.diff:+.3f}")

    # Step 5: Weight Functions
    print_header("⚖️ Step 5: Weight Functions")

    for s in scenarios:
        print(f"   - Scenario {s.label}: max standardized gap {max_standardized_gap(s):.3f}, "
              f"analytic log-rank power {schoenfeld_power(s):.3f}")

    # Step 6: Simulation
    print_header("🎲 Step 6: Simulation")

    print(f"Running 200 replicates of scenario {scenario.label}...")
    result = run_scenario(scenario, n_reps=200)
    print(f"\n   - Power RMST: {result.power_rmst:.3f}")
    print(f"   - Power PH: {result.power_ph:.3f} (analytic {result.analytic_power_ph:.3f})")
    print(f"   - Power RMST+: {result.power_rmst_plus:.3f}")
    print(f"   - Power PH+: {result.power_ph_plus:.3f}")
    print(f"   - Relative efficiency: {result.re:.2f}")
    print(f"   - Mean effective tau: {result.tau_bar:.3f}")

    print_header("🚀 Next Steps")

    print("   1. Run: python cli.py simulate --reps 10000 --out results.csv")
    print("   2. Run: streamlit run app.py")
    print("   3. Analyze your own trial: python cli.py analyze --data trial.csv --tau 24")

    print("\n" + "="*70)
    print("  Thank you for using SurvEff! 📊")
    print("="*70 + "\n")


if __name__ == "__main__":
    try:
        demo_workflow()
    except Exception as e:
        print(f"\n❌ Error: {str(e)}")
        import traceback
        traceback.print_exc()
