"""
SurvEff: RMST versus Log-rank Efficiency Workbench
Main Streamlit Application
"""

import io
import sys
import json
from pathlib import Path

import streamlit as st
import pandas as pd

# Add modules to path
sys.path.append(str(Path(__file__).parent))

from modules.asymptotics import DEFAULT_GRID_SIZE, max_standardized_gap, schoenfeld_power, weight_table
from modules.case_study import analyze_dataset
from modules.data_ingestion import DataIngestion
from modules.data_validation import TrialDataValidator
from modules.exceptions import SurvivalAnalysisError
from modules.scenarios import load_scenarios, parse_scenarios
from modules.scores import patient_scores, score_summary, scores_frame, summary_frame
from modules.simulation import results_frame, run_scenario

# Page configuration
st.set_page_config(
    page_title="SurvEff",
    page_icon="📊",
    layout="wide",
    initial_sidebar_state="expanded"
)

# Initialize session state
if 'dataset' not in st.session_state:
    st.session_state.dataset = None
if 'metadata' not in st.session_state:
    st.session_state.metadata = None
if 'simulation_results' not in st.session_state:
    st.session_state.simulation_results = []


def csv_download(df: pd.DataFrame, label: str, file_name: str):
    st.download_button(
        label=label,
        data=df.to_csv(index=False, lineterminator="\n").encode('utf-8'),
        file_name=file_name,
        mime="text/csv"
    )


def main():
    """Main application function"""

    # Title and description
    st.title("📊 SurvEff")
    st.markdown("### RMST-difference and log-rank/Cox analyses of two-arm survival trials")
    st.markdown("---")

    # Sidebar
    with st.sidebar:
        st.header("🎯 Navigation")
        page = st.radio(
            "Select Module",
            [
                "📁 Data Ingestion",
                "🧪 Case Study Analysis",
                "🧮 Patient Scores",
                "⚖️ Weight Functions",
                "🎲 Simulation"
            ]
        )

        st.markdown("---")
        st.markdown("### About")
        st.info(
            "SurvEff compares the restricted-mean-survival-time difference test "
            "with the log-rank test and Cox model: on uploaded trial data, through "
            "closed-form weight functions, and by Monte Carlo simulation."
        )

    # Route to appropriate page
    if page == "📁 Data Ingestion":
        data_ingestion_page()
    elif page == "🧪 Case Study Analysis":
        case_study_page()
    elif page == "🧮 Patient Scores":
        scores_page()
    elif page == "⚖️ Weight Functions":
        weights_page()
    elif page == "🎲 Simulation":
        simulation_page()


def data_ingestion_page():
    """Data ingestion interface"""
    st.header("📁 Patient-Level Data")

    st.markdown("""
    Upload a CSV file with header `time,event,arm`:
    - `time`: nonnegative follow-up time in any unit
    - `event`: 1 for an observed event, 0 for censored
    - `arm`: 0 for control, 1 for experimental
    """)

    uploaded_file = st.file_uploader("Choose a file", type=['csv'])

    if uploaded_file is not None:
        text = uploaded_file.getvalue().decode('utf-8')
        validator = TrialDataValidator()
        try:
            with st.spinner("Loading data..."):
                ingestion = DataIngestion()
                dataset, metadata = ingestion.ingest_data(io.StringIO(text))
                st.session_state.dataset = dataset
                st.session_state.metadata = metadata
        except SurvivalAnalysisError as e:
            st.error(f"Error loading data: {str(e)}")
            try:
                raw = DataIngestion().read_raw(io.StringIO(text))
            except SurvivalAnalysisError:
                return
            with st.expander("📄 Full Validation Report"):
                st.text(validator.generate_validation_report(validator.validate_data(raw)))
            return

        st.success(f"✅ Loaded {metadata['rows']} patients with {metadata['events']} events")

        col1, col2, col3 = st.columns(3)
        with col1:
            st.metric("Control (arm 0)", metadata['arm_counts'][0])
        with col2:
            st.metric("Experimental (arm 1)", metadata['arm_counts'][1])
        with col3:
            st.metric("Max follow-up", f"{metadata['max_time']:.3g}")

        for warning in metadata['warnings']:
            st.warning(warning)

        st.subheader("📋 Per-Arm Summary")
        st.dataframe(ingestion.describe(dataset), use_container_width=True)

        st.subheader("👀 Data Preview")
        st.dataframe(dataset.to_frame().head(10), use_container_width=True)


def case_study_page():
    """Cox, log-rank and RMST tests on the uploaded data"""
    st.header("🧪 Case Study Analysis")

    dataset = st.session_state.dataset
    if dataset is None:
        st.warning("⚠️ Please upload data in the Data Ingestion page first.")
        return

    col1, col2, col3 = st.columns(3)
    with col1:
        tau = st.number_input("Restriction time τ", min_value=0.0, max_value=float(dataset.cutoff),
                              value=float(dataset.cutoff), help="In the file's own time unit")
    with col2:
        time_unit = st.text_input("Time unit", value="months")
    with col3:
        label = st.text_input("Trial label", value="uploaded")

    if st.button("Run Analysis", type="primary"):
        try:
            report = analyze_dataset(dataset, tau, time_unit, label)
        except ValueError as e:
            st.error(f"Analysis failed: {str(e)}")
            return

        col1, col2, col3 = st.columns(3)
        with col1:
            st.metric("Hazard ratio", f"{report.hazard_ratio:.3f}")
        with col2:
            st.metric("Cox Z", f"{report.cox_z:.2f}")
        with col3:
            st.metric("RMST Z", f"{report.rmst_z:.2f}")
        st.caption("Z statistics are oriented so that positive values favor arm 1")

        row = pd.DataFrame([report.to_row()])
        st.dataframe(row, use_container_width=True)
        csv_download(row, "Download report as CSV", "case_study.csv")


def scores_page():
    """Per-patient score decompositions"""
    st.header("🧮 Patient Scores")

    dataset = st.session_state.dataset
    if dataset is None:
        st.warning("⚠️ Please upload data in the Data Ingestion page first.")
        return

    tau = st.number_input("Restriction time τ", min_value=0.0, max_value=float(dataset.cutoff),
                          value=float(dataset.cutoff))

    if st.button("Compute Scores", type="primary"):
        try:
            records = patient_scores(dataset, tau)
        except ValueError as e:
            st.error(f"Scoring failed: {str(e)}")
            return

        st.subheader("📊 Mean Score by Arm")
        summary = summary_frame(score_summary(records))
        st.dataframe(summary, use_container_width=True)

        st.subheader("👀 Scores")
        scores = scores_frame(records)
        st.dataframe(scores, use_container_width=True)
        csv_download(scores, "Download scores as CSV", "scores.csv")


def weights_page():
    """Closed-form weight functions of both tests"""
    st.header("⚖️ Weight Functions")

    scenarios = load_scenarios()
    grid_size = st.number_input("Grid points", min_value=2, value=DEFAULT_GRID_SIZE, step=1)

    overview = pd.DataFrame([
        {
            'Scenario': s.label,
            'Max standardized gap': max_standardized_gap(s, int(grid_size)),
            'Analytic log-rank power': schoenfeld_power(s),
            'Analytic log-rank power (+)': schoenfeld_power(s, cutoff=s.t_H_plus),
        }
        for s in scenarios
    ])
    st.dataframe(overview, use_container_width=True)

    table = weight_table(scenarios, grid_size=int(grid_size))
    with st.expander("👀 Weight table"):
        st.dataframe(table, use_container_width=True)
    csv_download(table, "Download weights as CSV", "weights.csv")


def simulation_page():
    """Monte Carlo power for one scenario at a time"""
    st.header("🎲 Simulation")

    uploaded_config = st.file_uploader("Scenario configuration (optional)", type=['json'])
    try:
        if uploaded_config is not None:
            scenarios = parse_scenarios(json.loads(uploaded_config.getvalue().decode('utf-8')))
        else:
            scenarios = load_scenarios()
    except ValueError as e:
        st.error(f"Invalid configuration: {str(e)}")
        return

    labels = {s.label: s for s in scenarios}
    col1, col2, col3 = st.columns(3)
    with col1:
        scenario = labels[st.selectbox("Scenario", list(labels))]
    with col2:
        n_reps = st.number_input("Replicates", min_value=10, value=500, step=100)
    with col3:
        seed = st.number_input("Seed", min_value=0, value=scenario.seed or 0, step=1)

    if st.button("Run Simulation", type="primary"):
        try:
            with st.spinner(f"Simulating {n_reps} trials..."):
                result = run_scenario(scenario, n_reps=int(n_reps), seed=int(seed))
        except SurvivalAnalysisError as e:
            st.error(f"Simulation failed: {str(e)}")
            return
        st.session_state.simulation_results.append(result)

    if st.session_state.simulation_results:
        table = results_frame(st.session_state.simulation_results)
        st.dataframe(table, use_container_width=True)
        csv_download(table, "Download results as CSV", "simulation.csv")


if __name__ == "__main__":
    main()
