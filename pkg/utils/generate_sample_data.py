"""
Generate sample patient-level survival data for testing SurvEff
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from modules.data_ingestion import write_csv
from modules.scenarios import load_scenarios, select_scenario
from modules.simulation import simulate_trial


def generate_trial_data(scenario_id=6, seed=42):
    """
    Simulate one trial from a bundled scenario

    The default is the moderate-event, fast-recruitment design
    analyzed at its main cutoff t_H.
    """
    scenario = select_scenario(load_scenarios(), scenario_id)
    rng = np.random.default_rng(seed)
    return simulate_trial(scenario, rng, scenario.t_H)


if __name__ == "__main__":
    # Create data directory if it doesn't exist
    data_dir = os.path.join(os.path.dirname(__file__), '..', 'data')
    os.makedirs(data_dir, exist_ok=True)

    dataset = generate_trial_data()
    csv_path = os.path.join(data_dir, 'sample_trial_data.csv')
    write_csv(dataset, csv_path)
    counts = dataset.arm_counts()
    print(f"Generated sample_trial_data.csv with {len(dataset)} patients "
          f"({counts[0]} control, {counts[1]} experimental, {dataset.event_count()} events)")
