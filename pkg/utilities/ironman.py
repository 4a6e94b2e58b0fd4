import json
from fractions import Fraction
from pathlib import Path

import allure

from market_base.market_model import MarketInstance
from market_base.market_serializer import read_instance


class IronMan:
    """
    Utility class providing reusable helper methods for:
      - Loading test data and checked-in instance files from the dataset directory
      - Attaching JSON documents to the allure report
      - Dynamically determining the project root directory
    """

    # -----------------------------------------------------------------------------
    # 🔧 INITIALIZER
    # -----------------------------------------------------------------------------
    def __init__(self, logger):
        self.logger = logger

    # -----------------------------------------------------------------------------
    # 📂 LOAD TEST DATA (Dataset JSON)
    # -----------------------------------------------------------------------------
    @staticmethod
    def load_test_data(json_path: str, data_set: str = None):
        """
        Loads test data from dataset/<json_path>/<data_set or json_path>_dataset.json.

        Raises:
            FileNotFoundError: If the specified JSON file does not exist.
            json.JSONDecodeError: If the file is not valid JSON.
        """
        if data_set:
            file_path = IronMan.get_sys_root() / "dataset" / json_path / f"{data_set}_dataset.json"
        else:
            file_path = IronMan.get_sys_root() / "dataset" / json_path / f"{json_path}_dataset.json"

        with open(file_path, encoding="utf-8") as f:
            return json.load(f)

    @staticmethod
    def dataset_file(json_path: str, file_name: str) -> Path:
        return IronMan.get_sys_root() / "dataset" / json_path / file_name

    @staticmethod
    def load_bytes(json_path: str, file_name: str) -> bytes:
        return IronMan.dataset_file(json_path, file_name).read_bytes()

    # -----------------------------------------------------------------------------
    # 🏪 LOAD MARKET INSTANCE
    # -----------------------------------------------------------------------------
    def load_instance(self, json_path: str, file_name: str) -> MarketInstance:
        """Reads a checked-in instance file and attaches it to the report."""
        data = self.load_bytes(json_path, file_name)
        self.logger.info(f"📂 Loading instance: {json_path}/{file_name}")
        self.attach_json(file_name, data)
        return read_instance(data)

    @staticmethod
    def expected_prices(test_data: dict) -> dict:
        """[[seller, buyer, price], ...] from a dataset record as a price dict."""
        return {(seller, buyer): price for seller, buyer, price in test_data["prices"]}

    @staticmethod
    def expected_payoffs(values: dict) -> dict:
        return {agent: Fraction(value) for agent, value in values.items()}

    # -----------------------------------------------------------------------------
    # 📎 ALLURE ATTACHMENTS
    # -----------------------------------------------------------------------------
    def attach_json(self, name: str, document) -> None:
        if isinstance(document, bytes):
            document = document.decode("utf-8")
        elif not isinstance(document, str):
            document = json.dumps(document, indent=2, ensure_ascii=False)
        allure.attach(document, name=name, attachment_type=allure.attachment_type.JSON)

    # -----------------------------------------------------------------------------
    # 📁 DETERMINE PROJECT ROOT DIRECTORY
    # -----------------------------------------------------------------------------
    @staticmethod
    def get_sys_root() -> Path:
        """
        Root directory of the project: the parent of the utilities package, so the
        dataset is found wherever pytest is started from.
        """
        return Path(__file__).resolve().parent.parent
