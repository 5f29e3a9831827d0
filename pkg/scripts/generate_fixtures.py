"""Regenerate the committed fixture files under fixtures/ from the synthetic
generator. Run from the repository root after changing varcast.datasets."""

from pathlib import Path

from varcast.datasets import catalog_to_csv, make_case_study_scenario, make_synthetic_catalog
from varcast.scenario import serialize_scenario

ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    fixtures = ROOT / "fixtures"
    fixtures.mkdir(exist_ok=True)
    catalog, _ = make_synthetic_catalog()
    (fixtures / "catalog.csv").write_text(catalog_to_csv(catalog), encoding="utf-8")
    scenario = make_case_study_scenario()
    (fixtures / "uae_wheat.json").write_text(serialize_scenario(scenario) + "\n", encoding="utf-8")
    print(f"wrote {fixtures / 'catalog.csv'} and {fixtures / 'uae_wheat.json'}")


if __name__ == "__main__":
    main()
