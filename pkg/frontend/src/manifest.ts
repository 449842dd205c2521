// Registration helper: validates form input with the same rules the
// harness applies server-side, then emits the manifest document the user
// registers via the CLI.

export interface ManifestForm {
  modelId: string;
  displayName: string;
  modelType: string;
  // one argv element per line in the form
  command: string;
  inputWindowLen: string;
  // "any" or comma separated integers
  horizonsSupported: string;
  timeoutSeconds: string;
}

export interface ManifestDoc {
  model_id: string;
  display_name: string;
  model_type: string;
  command: string[];
  input_window_len: number;
  horizons_supported: "any" | number[];
  timeout_seconds: number;
}

export type FieldErrors = Partial<Record<keyof ManifestForm, string>>;

export interface ValidationResult {
  errors: FieldErrors;
  manifest: ManifestDoc | null;
}

const MODEL_ID_RE = /^[a-z0-9_-]+$/;

export function validateManifestForm(
  form: ManifestForm,
  configuredLookback: number,
  configuredHorizons: number[],
): ValidationResult {
  const errors: FieldErrors = {};

  if (!MODEL_ID_RE.test(form.modelId)) {
    errors.modelId = "model id must match [a-z0-9_-]+";
  }
  if (form.displayName.trim() === "") {
    errors.displayName = "display name is required";
  }
  if (form.modelType.trim() === "") {
    errors.modelType = "model type is required";
  }

  const command = form.command
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line !== "");
  if (command.length === 0) {
    errors.command = "command must be a nonempty list of strings";
  }

  const windowLen = Number(form.inputWindowLen);
  if (!Number.isInteger(windowLen)) {
    errors.inputWindowLen = "window length must be an integer";
  } else if (windowLen !== configuredLookback) {
    errors.inputWindowLen = `input_window_len ${windowLen} != configured look-back ${configuredLookback}`;
  }

  let horizons: "any" | number[] = "any";
  const rawHorizons = form.horizonsSupported.trim();
  if (rawHorizons !== "any" && rawHorizons !== "") {
    const parts = rawHorizons.split(",").map((p) => p.trim());
    const parsed = parts.map(Number);
    if (parsed.some((h) => !Number.isInteger(h) || h <= 0)) {
      errors.horizonsSupported = "horizons must be 'any' or comma separated positive integers";
    } else {
      const missing = configuredHorizons.filter((h) => !parsed.includes(h));
      if (missing.length > 0) {
        errors.horizonsSupported = `configured horizons ${missing.join(",")} not in horizons_supported`;
      } else {
        horizons = [...parsed].sort((a, b) => a - b);
      }
    }
  }

  const timeout = form.timeoutSeconds.trim() === "" ? 60 : Number(form.timeoutSeconds);
  if (!Number.isInteger(timeout) || timeout <= 0) {
    errors.timeoutSeconds = "timeout_seconds must be a positive integer";
  }

  if (Object.keys(errors).length > 0) {
    return { errors, manifest: null };
  }
  return {
    errors: {},
    manifest: {
      model_id: form.modelId,
      display_name: form.displayName.trim(),
      model_type: form.modelType.trim(),
      command,
      input_window_len: windowLen,
      horizons_supported: horizons,
      timeout_seconds: timeout,
    },
  };
}

export function manifestFileText(doc: ManifestDoc): string {
  return JSON.stringify(doc, null, 2) + "\n";
}
