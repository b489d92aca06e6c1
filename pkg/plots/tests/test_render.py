import warnings

import pytest

from dbpplots.render import PlotSpec, SchemaError, render

BER_HEADER = "snr_db,scheme,architecture,algorithm,inversion,precision,trials,bit_errors,ber"
TRADEOFF_HEADER = (
    "n_coh,m_pd_ul,m_fd_ul,m_pd_dl,m_fd_dl,n_ex,n_im,"
    "separate_explicit,mmse_wf_reuse_gram,zf_zf_reuse_inverse,zf_zf_implicit_reuse_L"
)


def write_ber_csv(path, precisions=("fp32",)):
    lines = [BER_HEADER]
    for precision in precisions:
        for scheme, arch in (("pd-mmse", "pd"), ("fd-mmse", "fd")):
            for snr, ber in ((-10, 0.3), (-5, 0.1), (0, 0.01), (5, 0.001)):
                lines.append(
                    f"{snr},{scheme},{arch},mmse,implicit,{precision},1000,"
                    f"{int(1000 * 64 * ber)},{ber}"
                )
    path.write_text("\n".join(lines) + "\n")
    return path


def write_tradeoff_csv(path):
    lines = [TRADEOFF_HEADER]
    for n_coh in (1, 2, 4, 8, 16, 32, 64):
        m_pd = 4 * (256 + 32 * n_coh) / n_coh
        lines.append(
            f"{n_coh},{m_pd},192,{m_pd},{4 * (1 + 32 * n_coh) / n_coh},"
            f"{30016 / n_coh + 3072},{19104 / n_coh + 3072},"
            f"{60032 / n_coh + 6144},{43648 / n_coh + 6144},"
            f"{30016 / n_coh + 6144},{19104 / n_coh + 6144}"
        )
    path.write_text("\n".join(lines) + "\n")
    return path


class TestRender:
    def test_ber_waterfall(self, tmp_path):
        csv = write_ber_csv(tmp_path / "ber.csv")
        out = render(PlotSpec(str(csv), "ber", str(tmp_path / "ber.png")))
        assert out.is_file() and out.stat().st_size > 1000

    def test_ber_multi_precision_labels(self, tmp_path):
        csv = write_ber_csv(tmp_path / "ber.csv", precisions=("fp32", "fp8"))
        out = render(PlotSpec(str(csv), "ber", str(tmp_path / "ber.png")))
        assert out.is_file()

    def test_transfer_curves(self, tmp_path):
        csv = write_tradeoff_csv(tmp_path / "tradeoff.csv")
        out = render(PlotSpec(str(csv), "transfer", str(tmp_path / "transfer.png")))
        assert out.is_file() and out.stat().st_size > 1000

    def test_complexity_curves(self, tmp_path):
        csv = write_tradeoff_csv(tmp_path / "tradeoff.csv")
        out = render(PlotSpec(str(csv), "complexity", str(tmp_path / "c.svg")))
        assert out.is_file() and out.stat().st_size > 1000

    def test_missing_column_names_it(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("snr_db,scheme,precision\n0,pd-mmse,fp32\n")
        with pytest.raises(SchemaError, match="'ber'"):
            render(PlotSpec(str(bad), "ber", str(tmp_path / "x.png")))
        bad2 = tmp_path / "bad2.csv"
        bad2.write_text("n_coh,m_fd_ul\n1,192\n")
        with pytest.raises(SchemaError, match="'m_pd_ul'"):
            render(PlotSpec(str(bad2), "transfer", str(tmp_path / "x.png")))

    def test_header_only_warns_but_renders(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text(BER_HEADER + "\n")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            out = render(PlotSpec(str(empty), "ber", str(tmp_path / "empty.png")))
        assert out.is_file()
        assert any("no data rows" in str(w.message) for w in caught)

    def test_failed_records_skipped_with_warning(self, tmp_path):
        csv = tmp_path / "ber.csv"
        csv.write_text(
            BER_HEADER + "\n"
            "0,pd-mmse,pd,mmse,implicit,fp32,100,5,0.05\n"
            "0,fd-zf,fd,zf,implicit,fp32,0,0,nan\n"
        )
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            out = render(PlotSpec(str(csv), "ber", str(tmp_path / "ber.png")))
        assert out.is_file()
        assert any("failed record" in str(w.message) for w in caught)

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="kind"):
            PlotSpec("x.csv", "heatmap", "x.png")
